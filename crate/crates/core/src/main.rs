fn main() {
    let env: Vec<(String, String)> = std::env::vars().collect();
    std::process::exit(adiabatic_rl::cli::main_with(std::env::args_os(), &env));
}
