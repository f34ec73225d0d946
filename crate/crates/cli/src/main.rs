fn main() {
    std::process::exit(discrete_auction_cli::run(std::env::args_os()));
}
