#include "vssea/cli_io.hpp"

int main(int argc, char** argv)
{
    return vssea::cli::run_cli(argc, argv);
}
