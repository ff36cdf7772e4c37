use clap::Parser;

fn main() {
    let cli = gst_cli::Cli::parse();
    std::process::exit(gst_cli::run(cli));
}
