use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qwcli::commands::{
    cmd_cwt, cmd_fourier, cmd_lattice, cmd_reconstruct, cmd_verify, cmd_wavelet_gen, CwtArgs, FourierArgs, LatticeArgs,
    ReconstructArgs, VerifyArgs, WaveletGenArgs,
};

/// Generalized q-Bessel Fourier and wavelet analysis on the q-lattice.
#[derive(Debug, Parser)]
#[command(name = "qwcli", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fourier transform of a lattice signal.
    Fourier(FourierArgs),
    /// Continuous wavelet transform of a lattice signal.
    Cwt(CwtArgs),
    /// Inverse wavelet transform of a scalogram.
    Reconstruct(ReconstructArgs),
    /// Run the identity suite and write a JSON report.
    Verify(VerifyArgs),
    /// Emit a built-in Fourier-domain wavelet spec.
    WaveletGen(WaveletGenArgs),
    /// Emit lattice points with ones, Jackson weights or kernel values.
    Lattice(LatticeArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Fourier(a) => cmd_fourier(a),
        Command::Cwt(a) => cmd_cwt(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Verify(a) => cmd_verify(a),
        Command::WaveletGen(a) => cmd_wavelet_gen(a),
        Command::Lattice(a) => cmd_lattice(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
