//! A three-qubit state with no connected two-body ZZ across one cut
//! but a nonzero tripartite correlator.
use ursell::experiments::tripartite_report;

fn main() -> ursell::Result<()> {
    let r = tripartite_report()?;
    println!("{r:#?}");
    println!("u3 vs 1/18: {:.3e}", (r.u3_partition - 1.0 / 18.0).abs());
    Ok(())
}
