//! GHZ connected correlators: exact Bernoulli formula, dense check for small n,
//! and the large-n asymptotic.
use ursell::closed_form::{bernoulli, ghz_un_asymptotic, ghz_un_exact, ghz_un_rational};
use ursell::experiments::ghz_un_dense;

fn main() -> ursell::Result<()> {
    for n in 2..=24 {
        let exact = ghz_un_rational(n)?;
        let dense = if n <= 10 { format!("{:.6e}", ghz_un_dense(n)?) } else { "-".into() };
        let asym = if n % 2 == 0 && n >= 10 {
            format!("{:.6}", ghz_un_asymptotic(n)? / ghz_un_exact(n)?.abs())
        } else {
            "-".into()
        };
        println!("n={n:2}  B_n={:<14}  u_n={exact:<24}  dense={dense:<14}  asym/|exact|={asym}", bernoulli(n)?.to_string());
    }
    Ok(())
}
