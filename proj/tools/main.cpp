#include <iostream>

#include "chermnykh/app.hpp"

int main(int argc, char** argv) {
  return chermnykh::app::run(argc, argv, std::cout, std::cerr);
}
