//! Acceptance suite. Run with `cargo test -p ifm-core --test acceptance`.
//! Prints one line per criterion and exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{c, circuit_matrix, kron, matmul, matvec, norm_sq, random_case, step_matrix, C};
use ifm::composite::{nested_ifm, nested_setup, NestedConfig};
use ifm::optics::mzi::{LOWER, UPPER};
use ifm::optics::{build_mzi, measure, run_circuit, MziSpec};
use ifm::protocols::{
    dicke_energy_shift, ev_iterated, ev_iterated_monte_carlo, ev_single_shot,
    negative_result_update, paul_pavicic, uniform_sectors, zeno_ifm, CavityConfig, ZenoConfig,
};
use ifm::tsvf::trace_map;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{name} = {got:.15e}, expected {want:.15e} (tol {tol:e})")
    })
}

fn within(name: &str, elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{name} took {elapsed:?}, limit {limit:?}"))
}

fn lib<T>(r: ifm::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

const OPAQUE: C = C::new(0.0, 0.0);

fn ev_single() -> Outcome {
    let start = Instant::now();
    let dist = lib(ev_single_shot(0.5, Some(OPAQUE)))?;
    let elapsed = start.elapsed();
    let d1 = dist.get("D1").unwrap_or(f64::NAN);
    let d2 = dist.get("D2").unwrap_or(f64::NAN);
    close("P(D1)", d1, 0.25, 1e-12)?;
    close("P(D2)", d2, 0.25, 1e-12)?;
    close("P(explosion)", dist.explosion_prob, 0.5, 1e-12)?;
    within("single shot", elapsed, Duration::from_millis(1))?;
    Ok(format!("D1={d1} D2={d2} explosion={} in {elapsed:?}", dist.explosion_prob))
}

fn empty_mzi() -> Outcome {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for r in [0.1, 0.25, 0.5, 0.9] {
        let start = Instant::now();
        let mzi = lib(build_mzi(r, None, None))?;
        let run = lib(run_circuit(&mzi.circuit, &mzi.input()))?;
        let dist = lib(measure(&run.final_state, mzi.circuit.detectors().unwrap()))?;
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        let d1 = dist.get("D1").unwrap_or(f64::NAN);
        let d2 = dist.get("D2").unwrap_or(f64::NAN);
        close(&format!("P(D1) at R={r}"), d1, 1.0, 1e-12)?;
        close(&format!("P(D2) at R={r}"), d2, 0.0, 1e-12)?;
        within(&format!("R={r}"), elapsed, Duration::from_millis(1))?;
        worst = worst.max((d1 - 1.0).abs()).max(d2.abs());
    }
    Ok(format!("max deviation {worst:e}, slowest {slowest:?}"))
}

fn iterated_ev() -> Outcome {
    let start = Instant::now();
    let half = lib(ev_iterated(0.5))?.efficiency().ok_or("no conclusive runs")?;
    let small = lib(ev_iterated(0.01))?.efficiency().ok_or("no conclusive runs")?;
    close("eta(1/2)", half, 1.0 / 3.0, 1e-12)?;
    ensure(small > 0.49, || format!("eta(0.01) = {small}, expected > 0.49"))?;
    let mut notes = Vec::new();
    for (r, seed) in [(0.5, 7), (0.1, 11)] {
        let exact = lib(ev_iterated(r))?.p_success;
        let mc = lib(ev_iterated_monte_carlo(r, 1_000_000, seed))?;
        let z = (mc.p_success() - exact).abs() / mc.std_error();
        ensure(z <= 3.0, || {
            format!("Monte Carlo at R={r}: {} vs {exact}, {z:.2} sigma", mc.p_success())
        })?;
        notes.push(format!("R={r}: {z:.2}σ"));
    }
    let elapsed = start.elapsed();
    within("iterated bomb test", elapsed, Duration::from_secs(5))?;
    Ok(format!("eta(1/2)={half} eta(0.01)={small:.6} MC {} in {elapsed:?}", notes.join(", ")))
}

fn zeno() -> Outcome {
    let start = Instant::now();
    let empty = lib(zeno_ifm(&ZenoConfig::new(25)))?;
    let blocked = lib(zeno_ifm(&ZenoConfig::blocked(10)))?;
    let long = lib(zeno_ifm(&ZenoConfig::blocked(400)))?;
    let elapsed = start.elapsed();

    close("P(right), empty, N=25", empty.p_right, 1.0, 1e-12)?;
    // independent step-by-step rotation and projection
    let theta = PI / 20.0;
    let (mut left, mut right) = (c(1., 0.), c(0., 0.));
    for _ in 0..10 {
        let l = c(theta.cos(), 0.) * left + c(0., theta.sin()) * right;
        let r = c(0., theta.sin()) * left + c(theta.cos(), 0.) * right;
        left = l;
        right = r * 0.0;
    }
    close("p_success, N=10 vs step-by-step", blocked.report.p_success, left.norm_sqr(), 1e-10)?;
    close("p_success, N=10 vs cos^20", blocked.report.p_success, (PI / 20.0).cos().powi(20), 1e-10)?;
    let boom = long.report.p_explosion;
    ensure(boom < 0.01, || format!("p_explosion(N=400) = {boom}"))?;
    within("zeno", elapsed, Duration::from_millis(10))?;
    Ok(format!(
        "N=10 p_success={:.12} N=400 p_explosion={boom:.6} in {elapsed:?}",
        blocked.report.p_success
    ))
}

fn trace_map_vanishes() -> Outcome {
    let mut checked = 0;
    for slots in 1..=6 {
        for slot in 0..slots {
            for r in [0.2, 0.5, 0.8] {
                let spec = MziSpec {
                    first_reflectivity: r,
                    object: Some(OPAQUE),
                    arm_slots: slots,
                    object_slot: slot,
                    ..MziSpec::default()
                };
                let mzi = lib(spec.build())?;
                let map = lib(trace_map(&mzi.circuit, &mzi.input(), "D2"))?;
                for t in mzi.arm_slices.clone() {
                    let v = lib(map.get(LOWER, t))?;
                    ensure(v <= 1e-12, || {
                        format!("lower arm trace {v:e} at slice {t}, slots={slots} object={slot} R={r}")
                    })?;
                    checked += 1;
                }
                let upper: f64 = mzi.arm_slices.clone().map(|t| map.get(UPPER, t).unwrap()).sum();
                ensure(upper > 0.0, || "upper arm trace vanished too".into())?;
            }
        }
    }
    Ok(format!("{checked} lower-arm cells all zero"))
}

fn nested() -> Outcome {
    let start = Instant::now();
    let report = lib(nested_ifm(NestedConfig::default()))?;
    let elapsed = start.elapsed();

    // dense oracle over the 16 pair amplitudes
    let setup = lib(nested_setup(NestedConfig::default()))?;
    let mzi = lib(MziSpec::default().build())?;
    let space = mzi.circuit.space();
    let n = space.size();
    let lower = space.index_of(LOWER).unwrap();
    let d2 = space.index_of("d2").unwrap();
    let mut steps: Vec<Vec<Vec<C>>> = mzi
        .circuit
        .steps()
        .iter()
        .map(|s| {
            let m = step_matrix(space, s);
            kron(&m, &m)
        })
        .collect();
    steps[setup.working_step][lower * n + lower] = vec![c(0., 0.); n * n];
    let input: Vec<C> = setup.input.amplitudes().to_vec();
    let before: Vec<C> = steps[..3]
        .iter()
        .fold(input, |v, m| matvec(m, &v));
    let after = steps[3..]
        .iter()
        .fold(common::identity(n * n), |acc, m| matmul(m, &acc));
    let fin = matvec(&after, &before);
    let oracle = fin[d2 * n + d2].norm_sqr();
    let back: Vec<C> = (0..n * n).map(|k| after[d2 * n + d2][k].conj()).collect();
    let abl = |sel: &dyn Fn(usize, usize) -> bool| {
        let (mut yes, mut no) = (c(0., 0.), c(0., 0.));
        for k in 0..n * n {
            let term = back[k].conj() * before[k];
            if sel(k / n, k % n) {
                yes += term;
            } else {
                no += term;
            }
        }
        yes.norm_sqr() / (yes.norm_sqr() + no.norm_sqr())
    };

    close("P(D2,D2)", report.p_both_dark, 1.0 / 16.0, 1e-10)?;
    close("P(D2,D2) vs dense oracle", report.p_both_dark, oracle, 1e-10)?;
    let cond = report.conditional.ok_or("dark-dark coincidence impossible")?;
    close("ABL object", cond.object_in_working_area, 1.0, 1e-10)?;
    close("ABL photon", cond.photon_in_working_area, 1.0, 1e-10)?;
    close("ABL both", cond.both_in_working_area, 0.0, 1e-10)?;
    close("oracle ABL object", abl(&|_, b| b == lower), 1.0, 1e-10)?;
    close("oracle ABL photon", abl(&|a, _| a == lower), 1.0, 1e-10)?;
    close("oracle ABL both", abl(&|a, b| a == lower && b == lower), 0.0, 1e-10)?;
    within("nested", elapsed, Duration::from_millis(10))?;
    Ok(format!(
        "P(D2,D2)={} oracle={oracle} ABL=({}, {}, {}) in {elapsed:?}",
        report.p_both_dark,
        cond.object_in_working_area,
        cond.photon_in_working_area,
        cond.both_in_working_area
    ))
}

fn cavity() -> Outcome {
    let start = Instant::now();
    let cfg = |m, blocked| CavityConfig {
        mirror_reflectivity: 0.9,
        round_trips: m,
        object_present: blocked,
    };
    let short = lib(paul_pavicic(&cfg(3, false)))?;
    let long = lib(paul_pavicic(&cfg(10_000, false)))?;
    let blocked = lib(paul_pavicic(&cfg(3, true)))?;
    let elapsed = start.elapsed();
    ensure(short.p_reflect > 1e-4, || format!("empty M=3 reflection {}", short.p_reflect))?;
    ensure(long.p_reflect < 1e-3, || format!("empty M=1e4 reflection {}", long.p_reflect))?;
    close("blocked p_reflect", blocked.p_reflect, 0.81, 1e-12)?;
    within("cavity", elapsed, Duration::from_millis(100))?;
    Ok(format!(
        "empty M=3 {:.6}, M=1e4 {:.3e}, blocked {} in {elapsed:?}",
        short.p_reflect, long.p_reflect, blocked.p_reflect
    ))
}

fn renninger() -> Outcome {
    let state = lib(uniform_sectors(8))?;
    let covered = ["sector0", "sector1", "sector2", "sector3"];
    let (after, p_null) = lib(negative_result_update(&state, &covered))?;
    close("p_null", p_null, 0.5, 1e-12)?;
    for k in 0..8 {
        let label = format!("sector{k}");
        let want = if k < 4 { 0.0 } else { 0.25 };
        close(&label, lib(after.probability(&label))?, want, 1e-12)?;
    }
    Ok(format!("p_null={p_null}, survivors 0.25 each"))
}

fn dicke() -> Outcome {
    let shift = lib(dicke_energy_shift(50))?;
    let oracle = common::dicke_quadrature(50, 20_000);
    ensure(shift.e_after > shift.e_before, || {
        format!("E_after {} not above E_before {}", shift.e_after, shift.e_before)
    })?;
    let rel = (shift.e_after - oracle).abs() / oracle;
    ensure(rel < 0.01, || format!("E_after {} vs quadrature {oracle}", shift.e_after))?;
    Ok(format!("E_after={:.6} quadrature={oracle:.6} rel diff {rel:.2e}", shift.e_after))
}

fn conservation() -> Outcome {
    let start = Instant::now();
    let mut worst_cons = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for seed in 0..1000u64 {
        let case = random_case(seed, 6, 12);
        let run = lib(run_circuit(&case.circuit, &case.input))?;
        for (k, s) in run.trajectory.iter().enumerate() {
            let dev = (s.total_probability() - 1.0).abs();
            worst_cons = worst_cons.max(dev);
            ensure(dev <= 1e-12, || format!("seed {seed} step {k}: total off by {dev:e}"))?;
        }
        let m = circuit_matrix(&case.circuit);
        let fin = matvec(&m, case.input.amplitudes());
        let det = case.circuit.detectors().unwrap();
        let dist = lib(measure(&run.final_state, det))?;
        let space = case.circuit.space();
        let mut seen = 0.0;
        for (name, mode) in det.iter() {
            let want = fin[space.index_of(mode).unwrap()].norm_sqr();
            seen += want;
            let dev = (dist.get(name).unwrap() - want).abs();
            worst_oracle = worst_oracle.max(dev);
            ensure(dev <= 1e-10, || format!("seed {seed} detector {name}: off by {dev:e}"))?;
        }
        let checks = [
            ("explosion", dist.explosion_prob, 1.0 - norm_sq(&fin)),
            ("residual", dist.residual_prob, norm_sq(&fin) - seen),
        ];
        for (what, got, want) in checks {
            let dev = (got - want).abs();
            worst_oracle = worst_oracle.max(dev);
            ensure(dev <= 1e-10, || format!("seed {seed} {what}: off by {dev:e}"))?;
        }
    }
    let elapsed = start.elapsed();
    within("conservation suite", elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "1000 circuits, worst conservation {worst_cons:.1e}, worst oracle {worst_oracle:.1e} in {elapsed:?}"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("bomb test single shot", ev_single),
        ("empty matched interferometer", empty_mzi),
        ("iterated bomb test", iterated_ev),
        ("Zeno cavities", zeno),
        ("trace map on blocked arm", trace_map_vanishes),
        ("nested measurement", nested),
        ("Fabry-Perot cavity", cavity),
        ("negative-result update", renninger),
        ("energy after null result", dicke),
        ("conservation vs dense oracle", conservation),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
