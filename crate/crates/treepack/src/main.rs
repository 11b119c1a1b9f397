use treepack::cli::cli_dispatch;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(cli_dispatch(&argv));
}
