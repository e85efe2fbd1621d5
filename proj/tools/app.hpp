#pragma once

/// CLI entry point; returns the process exit code (0 success, 1 property or
/// verdict failure, 2 usage or config error).
int run_app(int argc, char** argv);
