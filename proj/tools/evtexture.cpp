#include "evtexture/cli.hpp"

int main(int argc, char** argv) { return evtexture::cli::dispatch(argc, argv); }
