//! Calibrate (c2, v) on an XX chain, then test the multipartite envelope
//! for strided single-site Z supports.
use ursell::experiments::{run_bound_check, BoundCheckParams, OutputFormat};

fn main() -> ursell::Result<()> {
    let params = BoundCheckParams { n: 8, k_values: vec![2, 3, 4], max_stride: 2, ..Default::default() };
    let outcome = run_bound_check(&params, 0)?;
    println!("{}", serde_json::to_string_pretty(&outcome.summary).unwrap());
    let csv = outcome.render(OutputFormat::Csv)?;
    for line in csv.lines().take(8) {
        println!("{line}");
    }
    println!("violations: {}", outcome.violations);
    Ok(())
}
