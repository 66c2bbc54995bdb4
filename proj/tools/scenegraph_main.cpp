#include <scenegraph/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return scenegraph::run_cli(argc, argv, std::cout, std::cerr); }
