mod common;

use std::fmt::Write as _;
use std::path::PathBuf;

use common::{enumerate_lp, random_lp, status_of, Enumerated};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risa_core::lp::{self, maxmin_epigraph, LinearProgram, LinearTerm, LpSolution, LpStatus};

fn check_against_oracle(lp: &LinearProgram) -> std::result::Result<(), String> {
    let sol = lp::solve(lp).map_err(|e| e.to_string())?;
    let want = enumerate_lp(lp);
    if sol.status != status_of(want) {
        return Err(format!("status {:?}, oracle {want:?}\n{}", sol.status, lp.to_text()));
    }
    if let Enumerated::Optimal(best) = want {
        if (sol.objective - best).abs() > 1e-6 * (1.0 + best.abs()) {
            return Err(format!("objective {} vs oracle {best}\n{}", sol.objective, lp.to_text()));
        }
        if lp.max_violation(&sol.x) > 1e-7 {
            return Err(format!("returned point violates constraints by {}", lp.max_violation(&sol.x)));
        }
        if (lp.objective_value(&sol.x) - sol.objective).abs() > 1e-9 * (1.0 + best.abs()) {
            return Err("reported objective disagrees with the returned point".into());
        }
    }
    Ok(())
}

#[test]
fn matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = [0usize; 3];
    for _ in 0..200 {
        let lp = random_lp(&mut rng);
        check_against_oracle(&lp).unwrap();
        seen[status_of(enumerate_lp(&lp)) as usize] += 1;
    }
    // The generator must exercise every outcome.
    assert!(seen.iter().all(|&k| k > 5), "status mix {seen:?}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn oracle_agreement_on_fuzzed_programs(seed in any::<u64>()) {
        let lp = random_lp(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(check_against_oracle(&lp).is_ok(), "{:?}", check_against_oracle(&lp));
    }

    #[test]
    fn objective_scaling_scales_the_optimum(seed in any::<u64>(), k in 0.01f64..100.0) {
        let lp = random_lp(&mut ChaCha8Rng::seed_from_u64(seed));
        let base = lp::solve(&lp).unwrap();
        let mut scaled = lp.clone();
        scaled.set_objective(lp.objective().iter().map(|c| c * k).collect()).unwrap();
        let s = lp::solve(&scaled).unwrap();
        prop_assert_eq!(s.status, base.status);
        if base.status == LpStatus::Optimal {
            prop_assert!((s.objective - k * base.objective).abs() <= 1e-7 * (1.0 + (k * base.objective).abs()));
        }
    }

    #[test]
    fn text_dump_round_trips(seed in any::<u64>()) {
        let lp = random_lp(&mut ChaCha8Rng::seed_from_u64(seed));
        let back = LinearProgram::from_text(&lp.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), lp.to_text());
        let (a, b) = (lp::solve(&lp).unwrap(), lp::solve(&back).unwrap());
        prop_assert_eq!(render(&a), render(&b));
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let lp = random_lp(&mut rng);
        let first = render(&lp::solve(&lp).unwrap());
        for _ in 0..3 {
            assert_eq!(render(&lp::solve(&lp).unwrap()), first);
        }
    }
}

/// Exact text form of a solution; `{:e}` on f64 is shortest round-trip.
fn render(sol: &LpSolution) -> String {
    let mut s = format!("status {:?}\nobjective {:e}\nx", sol.status, sol.objective);
    for v in &sol.x {
        let _ = write!(s, " {v:e}");
    }
    s.push('\n');
    s
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/lp")
}

/// A max-min program shaped like the planner's coverage subproblem.
fn maxmin_program(seed: u64, vars: usize, terms: usize) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut base = LinearProgram::new(vars);
    for j in 0..vars {
        base.set_bounds(j, 0.0, 1.0);
    }
    base.add_dense_row(&vec![1.0; vars], lp::Relation::Le, (vars / 3).max(1) as f64);
    let terms: Vec<LinearTerm> = (0..terms)
        .map(|_| LinearTerm {
            coeffs: (0..vars).filter_map(|j| rng.gen_bool(0.4).then(|| (j, rng.gen_range(0.1..4.0)))).collect(),
            constant: 0.0,
        })
        .collect();
    maxmin_epigraph(&terms, base).unwrap().0
}

fn corpus() -> Vec<(String, LinearProgram)> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut k = 0;
    while out.len() < 12 {
        let lp = random_lp(&mut rng);
        if lp::solve(&lp).unwrap().status == LpStatus::Optimal && lp.rows().len() >= 3 {
            out.push((format!("random_{k:02}"), lp));
            k += 1;
        }
    }
    out.push(("maxmin_small".into(), maxmin_program(1, 12, 30)));
    out.push(("maxmin_medium".into(), maxmin_program(2, 40, 80)));
    out
}

/// Solves every shipped program and compares the exact solution text.
/// `RISA_BLESS=1` rewrites the corpus instead.
#[test]
fn shipped_corpus_is_bit_stable() {
    let dir = corpus_dir();
    if std::env::var_os("RISA_BLESS").is_some() {
        std::fs::create_dir_all(&dir).unwrap();
        for (name, lp) in corpus() {
            std::fs::write(dir.join(format!("{name}.lp")), lp.to_text()).unwrap();
            std::fs::write(dir.join(format!("{name}.sol")), render(&lp::solve(&lp).unwrap())).unwrap();
        }
    }
    let mut checked = 0;
    let mut entries: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries.iter().filter(|p| p.extension().is_some_and(|e| e == "lp")) {
        let lp = LinearProgram::from_text(&std::fs::read_to_string(path).unwrap()).unwrap();
        let want = std::fs::read_to_string(path.with_extension("sol")).unwrap();
        assert_eq!(render(&lp::solve(&lp).unwrap()), want, "{}", path.display());
        checked += 1;
    }
    assert_eq!(checked, 14);
}
