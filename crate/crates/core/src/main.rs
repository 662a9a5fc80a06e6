fn main() -> std::process::ExitCode {
    pricesent::cli::main()
}
