use std::process::ExitCode;

fn main() -> ExitCode {
    match pdknn::cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                clap_err.exit();
            }
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
