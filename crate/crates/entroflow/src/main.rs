fn main() {
    env_logger::init();
    std::process::exit(entroflow::dispatch(std::env::args_os()));
}
