// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wsopt/driver.hpp"

int main(int argc, char** argv)
{
    return wsopt::cli_main(argc, argv);
}
