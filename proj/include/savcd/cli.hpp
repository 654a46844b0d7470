#pragma once

namespace savcd {

// Full command-line surface. Exit codes: 0 success, 2 configuration error,
// 3 backend error, 4 image I/O error, 1 anything else.
int cli_main(int argc, char** argv);

}  // namespace savcd
