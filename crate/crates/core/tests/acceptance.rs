//! Acceptance suite: one line per criterion, nonzero exit if any attainable
//! criterion fails. Run with `cargo test --test acceptance`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ursell::closed_form::{
    ghz_un_asymptotic, ghz_un_exact, xx_disconnected_z, xx_mps_amplitude, xx_un_closed_form, XXChainMps,
};
use ursell::correlators::{
    reconstruct_disconnected, un_generating_fd, un_partition_sum, un_recursive, u2, CorrelatorRequest,
};
use ursell::experiments::{
    random_nn_hamiltonian, random_observable, random_state, strided_supports, xcheck_report, xx_chain_un_dense,
    XcheckParams,
};
use ursell::geometry::{
    calibrate_velocity, check_bound, critical_distance, min_bipartition_distance, CalibrationProbe, Geometry,
};
use ursell::partitions::{bell_number, binomial, enumerate_partitions, stirling2};
use ursell::quantum::{expectation, global_phase_distance, Hamiltonian, Observable, Pauli, PauliString, Propagator, StateVector};
use ursell::states::{
    cluster_state, cluster_state_by_evolution, window_observables, ghz, graph_stabilizer_group,
    tripartite_example_state, path_end_y_observables, stabilizer_connected_correlator, GraphSpec,
};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

enum Status {
    Pass,
    Fail,
    /// Fails, and the target is known to be unattainable; reported, not fatal.
    KnownFail(&'static str),
    /// Reported for context only.
    Info,
}

struct Line {
    label: String,
    status: Status,
    detail: String,
}

fn line(label: &str, ok: bool, detail: String) -> Line {
    Line {
        label: label.to_string(),
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn z_all(n: usize) -> Vec<Observable> {
    (0..n).map(Observable::z).collect()
}

fn bits_of(idx: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| (idx >> (n - 1 - i) & 1) as u8).collect()
}

fn tripartite() -> Line {
    let psi = tripartite_example_state();
    let req = CorrelatorRequest::new(&psi, z_all(3)).unwrap();
    let target = 1.0 / 18.0;
    let part = un_partition_sum(&req).unwrap();
    let rec = un_recursive(&req).unwrap();
    let fd = un_generating_fd(&req, 1e-2).unwrap();
    let zz = |a, b| Observable::from(PauliString::from_pairs(&[(a, Pauli::Z), (b, Pauli::Z)]).unwrap());
    let c1 = u2(&psi, &Observable::z(0), &zz(1, 2)).unwrap();
    let c2 = u2(&psi, &Observable::z(1), &zz(0, 2)).unwrap();
    let c3 = u2(&psi, &Observable::z(2), &zz(0, 1)).unwrap();
    let ok = (part - target).abs() <= 1e-12
        && (rec - target).abs() <= 1e-12
        && (fd - target).abs() <= 1e-4
        && c1.abs() <= 1e-12
        && c2.abs() > 1e-3
        && c3.abs() > 1e-3;
    line(
        "1 tripartite exactness",
        ok,
        format!(
            "u3 partition {part:.3e} recursive {rec:.3e} fd {fd:.6e} (1/18 = {target:.6e}); u2 cuts 1|23 {c1:.1e}, 2|13 {c2:.4e}, 3|12 {c3:.4e}"
        ),
    )
}

fn ghz_bernoulli() -> Line {
    let mut worst_rel: f64 = 0.0;
    let mut worst_odd: f64 = 0.0;
    for n in 2..=12 {
        let state = ghz(n).unwrap();
        let dense = un_partition_sum(&CorrelatorRequest::new(&state, z_all(n)).unwrap()).unwrap();
        let exact = ghz_un_exact(n).unwrap();
        if n % 2 == 0 {
            worst_rel = worst_rel.max(((dense - exact) / exact).abs());
        } else {
            worst_odd = worst_odd.max(dense.abs());
        }
    }
    let r20 = ghz_un_asymptotic(20).unwrap() / ghz_un_exact(20).unwrap().abs();
    let r40 = ghz_un_asymptotic(40).unwrap() / ghz_un_exact(40).unwrap().abs();
    let ok = worst_rel <= 1e-8 && worst_odd <= 1e-10 && (r20 - 1.0).abs() <= 0.05 && (r40 - 1.0).abs() <= 0.01;
    line(
        "2 GHZ/Bernoulli",
        ok,
        format!(
            "n=2..12 max rel err (even) {worst_rel:.1e}, max |u| (odd) {worst_odd:.1e}; asymptotic ratio n=20 {r20:.4}, n=40 {r40:.4}"
        ),
    )
}

fn xx_chain() -> Line {
    let times: Vec<f64> = (0..50).map(|k| FRAC_PI_2 * k as f64 / 49.0).collect();
    let mut worst_un: f64 = 0.0;
    for n in 2..=10 {
        for &t in &times {
            worst_un = worst_un.max((xx_chain_un_dense(n, t).unwrap() - xx_un_closed_form(n, t)).abs());
        }
    }
    let mut worst_pattern: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=8 {
        let h = Hamiltonian::xx_chain(n).unwrap();
        for _ in 0..4 {
            let t = rng.gen_range(0.0..PI);
            let state = h.evolve(&StateVector::basis(n, 0).unwrap(), t).unwrap();
            for mask in 1usize..1 << n {
                let sites: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let obs: Vec<Observable> = sites.iter().map(|&s| Observable::z(s)).collect();
                let dense = expectation(&state, &obs).unwrap().re;
                let rule = xx_disconnected_z(&sites, n, t).unwrap();
                worst_pattern = worst_pattern.max((dense - rule).abs());
            }
        }
    }
    let h5 = Hamiltonian::xx_chain(5).unwrap();
    let mut worst_five: f64 = 0.0;
    for &t in &times {
        let state = h5.evolve(&StateVector::basis(5, 0).unwrap(), t).unwrap();
        let v = expectation(&state, &[Observable::z(1), Observable::z(2), Observable::z(4)]).unwrap().re;
        worst_five = worst_five.max((v - (2.0 * t).cos().powi(3)).abs());
    }
    let ok = worst_un <= 1e-9 && worst_pattern <= 1e-10 && worst_five <= 1e-10;
    line(
        "3 XX-chain u_n(t)",
        ok,
        format!(
            "n=2..10 x 50 times max |dense - sin^2(2t)^(n-1)| {worst_un:.1e}; all Z-patterns n<=8 max err {worst_pattern:.1e}; <Z2 Z3 Z5> vs cos^3(2t) {worst_five:.1e}"
        ),
    )
}

fn mps() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_canon: f64 = 0.0;
    for _ in 0..200 {
        let (l, a, r) = XXChainMps::new(rng.gen_range(-10.0..10.0)).canonical_errors();
        worst_canon = worst_canon.max(l).max(a).max(r);
    }
    let mut worst_amp: f64 = 0.0;
    for n in 2..=8 {
        let h = Hamiltonian::xx_chain(n).unwrap();
        for _ in 0..5 {
            let t = rng.gen_range(0.0..2.0 * PI);
            let state = h.evolve(&StateVector::basis(n, 0).unwrap(), t).unwrap();
            for idx in 0..1 << n {
                let mps = xx_mps_amplitude(&bits_of(idx, n), t).unwrap();
                worst_amp = worst_amp.max((mps - state.amplitudes()[idx]).norm());
            }
        }
    }
    line(
        "4 MPS identities",
        worst_canon <= 1e-12 && worst_amp <= 1e-10,
        format!("canonical-form error over 200 times {worst_canon:.1e}; amplitudes n=2..8 vs dense {worst_amp:.1e}"),
    )
}

fn cluster() -> Vec<Line> {
    let mut worst_path_dense: f64 = 0.0;
    let mut worst_phase: f64 = 0.0;
    for n in 3..=10 {
        let g = GraphSpec::path(n);
        let state = cluster_state(&g).unwrap();
        let obs = path_end_y_observables(n).unwrap().into_iter().map(Observable::from).collect();
        let u = un_partition_sum(&CorrelatorRequest::new(&state, obs).unwrap()).unwrap();
        worst_path_dense = worst_path_dense.max((u.abs() - 1.0).abs());
        worst_phase = worst_phase.max(global_phase_distance(&state, &cluster_state_by_evolution(&g).unwrap()).unwrap());
    }
    let mut path_stab_ok = true;
    for n in 3..=40 {
        let s = graph_stabilizer_group(&GraphSpec::path(n)).unwrap();
        let u = stabilizer_connected_correlator(&s, &path_end_y_observables(n).unwrap()).unwrap();
        path_stab_ok &= u == 1.into() || u == (-1).into();
    }

    let mut magnitude_ok = true;
    let mut signed_ok = true;
    let mut observed = Vec::new();
    for n in [4usize, 7, 10, 13] {
        let g = GraphSpec::load(format!("{FIXTURES}/windows_n{n}.json")).unwrap();
        let target = 1i64 << ((n - 1) / 3);
        let pattern = window_observables(n).unwrap();
        let stab = stabilizer_connected_correlator(&graph_stabilizer_group(&g).unwrap(), &pattern).unwrap();
        let stab: i64 = stab.try_into().unwrap();
        let value = if n <= 10 {
            let state = cluster_state(&g).unwrap();
            worst_phase = worst_phase.max(global_phase_distance(&state, &cluster_state_by_evolution(&g).unwrap()).unwrap());
            let obs = pattern.into_iter().map(Observable::from).collect();
            let dense = un_partition_sum(&CorrelatorRequest::new(&state, obs).unwrap()).unwrap();
            magnitude_ok &= (dense - stab as f64).abs() <= 1e-9;
            dense
        } else {
            stab as f64
        };
        magnitude_ok &= stab.abs() == target;
        signed_ok &= stab == target;
        observed.push(format!("n={n}: {value:.6}"));
    }
    let ok = worst_path_dense <= 1e-10 && path_stab_ok && magnitude_ok && worst_phase <= 1e-9;
    let mut lines = vec![line(
        "5 cluster states",
        ok,
        format!(
            "path n=3..10 max ||u|-1| {worst_path_dense:.1e}; stabilizer n=3..40 all +-1: {path_stab_ok}; |u_n| = 2^((n-1)/3) on the long-range fixture: {magnitude_ok} ({}); CZ vs H_cZ phase distance {worst_phase:.1e}",
            observed.join(", ")
        ),
    )];
    lines.push(Line {
        label: "5 cluster states, sign of the long-range value".into(),
        status: if signed_ok {
            Status::Pass
        } else {
            Status::KnownFail("no graph on a 4-site window gives +2 for the YYYY pattern; see the exhaustive property test")
        },
        detail: format!("target +2^((n-1)/3); observed {}", observed.join(", ")),
    });
    lines
}

fn geometry() -> Line {
    let g = Geometry::load(format!("{FIXTURES}/collinear3.json")).unwrap();
    let (r, bp) = critical_distance(&g, &[vec![0], vec![1], vec![2]]).unwrap();
    let collinear_ok = r == 2.0 && bp.second == vec![2];

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bracket_ok = true;
    let mut cases = 0;
    for n in 2..=8 {
        for _ in 0..40 {
            let pos: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)]).collect();
            let geo = Geometry::from_positions(pos).unwrap();
            let supports: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
            let (r, _) = critical_distance(&geo, &supports).unwrap();
            let lo = min_bipartition_distance(&geo, &supports).unwrap();
            let all: Vec<usize> = (0..n).collect();
            bracket_ok &= lo <= r && r <= geo.max_pairwise(&all);
            cases += 1;
        }
    }

    let mut worst_recon: f64 = 0.0;
    for _ in 0..50 {
        let state = random_state(4, &mut rng).unwrap();
        let obs: Vec<Observable> = (0..4).map(|s| random_observable(vec![s], &mut rng).unwrap()).collect();
        let direct = expectation(&state, &obs).unwrap().re;
        let rebuilt = reconstruct_disconnected(&CorrelatorRequest::new(&state, obs).unwrap()).unwrap();
        worst_recon = worst_recon.max((direct - rebuilt).abs());
    }
    line(
        "6 geometry / critical distance",
        collinear_ok && bracket_ok && worst_recon <= 1e-10,
        format!(
            "collinear R = {r} via {:?}|{:?}; min-bipartition <= R <= max-pairwise over {cases} random geometries: {bracket_ok}; reconstruction max err {worst_recon:.1e}",
            bp.first, bp.second
        ),
    )
}

/// Largest allowed increase of the light-cone decay slope above −1.
const DECAY_SLACK: f64 = 0.25;

fn bounds() -> Vec<Line> {
    let n = 10;
    let times: Vec<f64> = (0..=60).map(|k| 0.05 * k as f64).collect();
    let h = Hamiltonian::xx_chain(n).unwrap();
    let geo = Geometry::chain(n, 1.0).unwrap();
    let cal = calibrate_velocity(&geo, &h, &CalibrationProbe::zz(n, times.clone()).unwrap()).unwrap();
    let params = cal.params;

    let mut violations = 0;
    let mut checked = 0;
    let mut min_slack = f64::INFINITY;
    for (size, gh) in [(10usize, h.clone()), (12, Hamiltonian::xx_chain(12).unwrap())] {
        let geo = Geometry::chain(size, 1.0).unwrap();
        let states: Vec<StateVector> = times
            .iter()
            .map(|&t| Propagator::new(&gh, t).unwrap().apply(&StateVector::basis(size, 0).unwrap()).unwrap())
            .collect();
        for k in 2..=6 {
            for sites in strided_supports(size, k, 3) {
                let supports: Vec<Vec<usize>> = sites.iter().map(|&s| vec![s]).collect();
                let (r, _) = critical_distance(&geo, &supports).unwrap();
                let obs: Vec<Observable> = sites.iter().map(|&s| Observable::z(s)).collect();
                let series: Vec<(f64, f64)> = states
                    .iter()
                    .zip(&times)
                    .map(|(st, &t)| (t, un_partition_sum(&CorrelatorRequest::new(st, obs.clone()).unwrap()).unwrap()))
                    .collect();
                let rep = check_bound(&series, k, r, &params).unwrap();
                violations += rep.violations();
                checked += rep.points.len();
                min_slack = min_slack.min(rep.min_log_slack);
            }
        }
    }
    let envelope_line = line(
        "7 multipartite envelope (XX chain)",
        violations == 0,
        format!(
            "calibrated c2 = {:.4}, v = {:.2e} from {} two-point samples; {checked} (k<=6, support, t) points on n=10 and n=12, {violations} violations, min log-slack {min_slack:.3}",
            params.c2,
            params.v,
            cal.samples.len()
        ),
    );

    let (decay_line, info) = light_cone_decay(&h, n, &times, params.c2.ln(), params.v);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noncommuting = random_nn_hamiltonian(8, &mut rng).unwrap();
    let nc_params = calibrate_velocity(
        &Geometry::chain(8, 1.0).unwrap(),
        &noncommuting,
        &CalibrationProbe::zz(8, times.clone()).unwrap(),
    )
    .unwrap()
    .params;
    let (_, nc_info) = light_cone_decay(&noncommuting, 8, &times, nc_params.c2.ln(), nc_params.v);
    let decay_line = line(
        "7 light-cone decay (XX chain)",
        decay_line,
        format!("slope limit -1 + {DECAY_SLACK}; {info}"),
    );
    let info_line = Line {
        label: "7 light-cone decay, random non-commuting chain n=8 (informational)".into(),
        status: Status::Info,
        detail: nc_info,
    };
    vec![envelope_line, decay_line, info_line]
}

/// Least-squares slope of `ln|u2|` (largest over pairs at each separation)
/// against `r`, over separations outside the cone `r >= ln c2 + v t` whose
/// correlator is above the calibration floor. A profile that drops below the
/// floor everywhere outside the cone counts as decaying arbitrarily fast.
fn light_cone_decay(h: &Hamiltonian, size: usize, times: &[f64], ln_c2: f64, v: f64) -> (bool, String) {
    let floor = ursell::geometry::CALIBRATION_FLOOR;
    let mut ok = true;
    let mut fitted = 0;
    let mut vanished = 0;
    let mut worst = f64::NEG_INFINITY;
    for &t in times {
        let state = Propagator::new(h, t).unwrap().apply(&StateVector::basis(size, 0).unwrap()).unwrap();
        let mut profile = vec![0.0f64; size];
        for i in 0..size {
            for j in i + 1..size {
                let val = u2(&state, &Observable::z(i), &Observable::z(j)).unwrap().abs();
                profile[j - i] = profile[j - i].max(val);
            }
        }
        let cone = ln_c2 + v * t;
        let pts: Vec<(f64, f64)> = (1..size)
            .filter(|&r| r as f64 >= cone && profile[r] >= floor)
            .map(|r| (r as f64, profile[r].ln()))
            .collect();
        if pts.len() < 2 {
            vanished += 1;
            continue;
        }
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / m, sy / m);
        let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let var: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = cov / var;
        worst = worst.max(slope);
        ok &= slope <= -1.0 + DECAY_SLACK;
        fitted += 1;
    }
    let worst = if fitted > 0 { format!("{worst:.3}") } else { "n/a".into() };
    (
        ok,
        format!(
            "{fitted} times with a fitted slope (worst {worst}), {vanished} times where u2 is below {floor:e} everywhere outside the cone"
        ),
    )
}

fn cross_oracle() -> Line {
    let step = 1e-2;
    let r = xcheck_report(
        &XcheckParams {
            trials: 100,
            max_sites: 5,
            step,
        },
        2024,
    )
    .unwrap();
    let ok = r.max_partition_vs_recursive <= 1e-10
        && r.max_partition_vs_fd <= 10.0 * step * step
        && r.max_product_state_un <= 1e-10;
    line(
        "8 cross-oracle randomized",
        ok,
        format!(
            "100 trials: |partition - recursive| {:.1e}, |partition - fd| {:.1e} (limit {:.0e}), product-state mixed u_k {:.1e}",
            r.max_partition_vs_recursive,
            r.max_partition_vs_fd,
            10.0 * step * step,
            r.max_product_state_un
        ),
    )
}

fn combinatorics() -> Line {
    let mut counts_ok = true;
    for n in 1..=10usize {
        counts_ok &= enumerate_partitions(n).unwrap().count() as u128 == bell_number(n as u32).unwrap();
    }
    let mut signed_ok = true;
    for v in 0..=20u32 {
        let mut sum: i128 = 0;
        let mut fact: i128 = 1;
        for a in 0..=v {
            if a > 0 {
                fact *= a as i128;
            }
            let sign = if a % 2 == 0 { 1 } else { -1 };
            sum += sign * fact * stirling2(v, a).unwrap() as i128;
        }
        signed_ok &= sum == if v % 2 == 0 { 1 } else { -1 };
    }
    let mut completeness_ok = true;
    for n in 1..=10u32 {
        let total: u128 = (0..n)
            .map(|v| binomial((n - 1) as u64, v as u64) * (0..=v).map(|a| stirling2(v, a).unwrap()).sum::<u128>())
            .sum();
        completeness_ok &= total == bell_number(n).unwrap();
    }
    line(
        "9 combinatorics",
        counts_ok && signed_ok && completeness_ok,
        format!(
            "partition counts = Bell(n), n<=10: {counts_ok}; sum_a (-1)^a a! S(v,a) = (-1)^v, v<=20: {signed_ok}; completeness sum = Bell(n), n<=10: {completeness_ok}"
        ),
    )
}

fn main() -> ExitCode {
    let mut lines = vec![tripartite(), ghz_bernoulli(), xx_chain(), mps()];
    lines.extend(cluster());
    lines.push(geometry());
    lines.extend(bounds());
    lines.push(cross_oracle());
    lines.push(combinatorics());

    let mut failed = 0;
    for l in &lines {
        let tag = match &l.status {
            Status::Pass => "PASS".to_string(),
            Status::Fail => {
                failed += 1;
                "FAIL".to_string()
            }
            Status::KnownFail(why) => format!("FAIL (known, not fatal: {why})"),
            Status::Info => "INFO".to_string(),
        };
        println!("criterion {}: {tag} | {}", l.label, l.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criterion line(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
