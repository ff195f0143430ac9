// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

fn main() {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    if let Err(e) = harmnet_cli::run(std::env::args_os(), &mut lock) {
        let _ = lock.flush();
        eprintln!("harmnet: {e}");
        std::process::exit(e.exit_code());
    }
}
