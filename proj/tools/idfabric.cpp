/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/cli.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return idfabric::run_cli(argc, argv, std::cout, std::cerr);
}
