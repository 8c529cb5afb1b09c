#include "kppfront/cli.hpp"

int main(int argc, char** argv) { return kpp::run(argc, argv); }
