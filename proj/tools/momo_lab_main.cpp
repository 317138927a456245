#include "momolab/pipelines.hpp"

int main(int argc, char** argv) {
  return momolab::cli_main(argc, argv);
}
