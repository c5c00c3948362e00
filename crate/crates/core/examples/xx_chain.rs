//! XX chain from |0…0⟩: closed form, exact counting sum and dense simulation.
use std::f64::consts::FRAC_PI_2;
use ursell::closed_form::{xx_un_by_counting, xx_un_closed_form};
use ursell::experiments::xx_chain_un_dense;

fn main() -> ursell::Result<()> {
    for n in [2usize, 4, 6, 8] {
        for k in 0..=8 {
            let t = FRAC_PI_2 * k as f64 / 8.0;
            let closed = xx_un_closed_form(n, t);
            let counted = xx_un_by_counting(n, t)?;
            let dense = xx_chain_un_dense(n, t)?;
            println!("n={n} t={t:.4}  closed={closed:+.10e}  counted-closed={:.1e}  dense-closed={:.1e}", counted - closed, dense - closed);
        }
    }
    Ok(())
}
