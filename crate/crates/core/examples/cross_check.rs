//! Partition sum, subtraction recursion and generating-function derivative
//! on random states and observables.
use ursell::experiments::{xcheck_report, XcheckParams};

fn main() -> ursell::Result<()> {
    let r = xcheck_report(&XcheckParams { trials: 30, ..Default::default() }, 42)?;
    println!("{r:#?}");
    Ok(())
}
