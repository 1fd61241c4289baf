fn main() -> std::process::ExitCode {
    elastic_arcs::cli::main()
}
