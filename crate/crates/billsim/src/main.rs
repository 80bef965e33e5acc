fn main() {
    std::process::exit(billsim::cli::dispatch(std::env::args()));
}
