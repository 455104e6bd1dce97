#include <iostream>

#include "cova/cli.hpp"

int main(int argc, char** argv) {
  return cova::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
