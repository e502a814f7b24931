//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::sync::OnceLock;

use curveflow::diagnostics::{self, MonitorReport, MonitorStatus};
use curveflow::flow::{self, ContainmentConfig, FlowConfig, FlowScheme, FlowState, InitialProfile, SnapshotCadence, Trajectory};
use curveflow::geometry;
use curveflow::oracle::{self, CircleSolution, RandomConvexBody};
use curveflow::{AngleGrid, CurvatureProfile, SpeedLaw, SupportProfile};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn grid(n: usize) -> AngleGrid {
    AngleGrid::new(n).unwrap()
}

fn law(p: f64) -> SpeedLaw {
    SpeedLaw::power(p).unwrap()
}

struct Shipped {
    name: &'static str,
    law: SpeedLaw,
    traj: Trajectory,
}

fn simulate(name: &'static str, p: f64, initial: InitialProfile, tweak: impl FnOnce(&mut FlowConfig)) -> Shipped {
    let mut cfg = FlowConfig::new(law(p), initial);
    tweak(&mut cfg);
    let traj = flow::run(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
    Shipped { name, law: cfg.law, traj }
}

const CIRCLE_EXPONENTS: [f64; 4] = [1.0, 1.0 / 3.0, 2.0, 3.0];

fn circle_runs() -> &'static Vec<Shipped> {
    static RUNS: OnceLock<Vec<Shipped>> = OnceLock::new();
    RUNS.get_or_init(|| {
        std::thread::scope(|s| {
            let handles: Vec<_> = CIRCLE_EXPONENTS
                .iter()
                .map(|&p| {
                    s.spawn(move || {
                        let kp = CurvatureProfile::constant(grid(256), 1.0, 0.0).unwrap();
                        simulate("circle", p, InitialProfile::Curvature(kp), |c| c.require_hypotheses = p >= 1.0)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    })
}

fn ellipse_run(n: usize) -> &'static Shipped {
    static N512: OnceLock<Shipped> = OnceLock::new();
    static N1024: OnceLock<Shipped> = OnceLock::new();
    let cell = match n {
        512 => &N512,
        1024 => &N1024,
        _ => unreachable!(),
    };
    cell.get_or_init(|| {
        let kp = oracle::ellipse_profile(2.0, 1.0, grid(n)).unwrap();
        simulate(if n == 512 { "ellipse 2:1 p=1 n=512" } else { "ellipse 2:1 p=1 n=1024" }, 1.0, InitialProfile::Curvature(kp), |_| {})
    })
}

fn cross_run() -> &'static Shipped {
    static RUN: OnceLock<Shipped> = OnceLock::new();
    RUN.get_or_init(|| {
        let kp = oracle::ellipse_profile(2.0, 1.0, grid(256)).unwrap();
        simulate("ellipse 2:1 p=1 n=256 both forms", 1.0, InitialProfile::Curvature(kp), |c| {
            c.scheme = FlowScheme::Both;
            c.area_floor = 0.01;
        })
    })
}

fn other_runs() -> &'static Vec<Shipped> {
    static RUNS: OnceLock<Vec<Shipped>> = OnceLock::new();
    RUNS.get_or_init(|| {
        std::thread::scope(|s| {
            let a = s.spawn(|| {
                let kp = oracle::ellipse_profile(1.5, 1.0, grid(256)).unwrap();
                simulate("ellipse 1.5:1 p=2 n=256", 2.0, InitialProfile::Curvature(kp), |_| {})
            });
            let b = s.spawn(|| {
                let kp = oracle::ellipse_profile(1.5, 1.0, grid(256)).unwrap();
                simulate("ellipse 1.5:1 p=3 n=256", 3.0, InitialProfile::Curvature(kp), |_| {})
            });
            let c = s.spawn(|| {
                let sp = RandomConvexBody::sample(1, 5, 0.5).unwrap().support_profile(grid(256)).unwrap();
                simulate("random body p=1 n=256 support form", 1.0, InitialProfile::Support(sp), |c| {
                    c.scheme = FlowScheme::Support;
                })
            });
            vec![a.join().unwrap(), b.join().unwrap(), c.join().unwrap()]
        })
    })
}

/// Every run the suite ships, all at n ≥ 256.
fn shipped() -> Vec<&'static Shipped> {
    let mut all: Vec<&Shipped> = circle_runs().iter().collect();
    all.push(ellipse_run(512));
    all.push(ellipse_run(1024));
    all.push(cross_run());
    all.extend(other_runs().iter());
    all
}

fn monitor_on_all(f: impl Fn(&Shipped) -> MonitorReport) -> (bool, String) {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    let mut bad = Vec::new();
    for run in shipped() {
        let rep = f(run);
        worst = worst.min(rep.worst_margin);
        if rep.status != MonitorStatus::Pass {
            ok = false;
            bad.push(format!("{} [{} p={}]: {:?}", rep.status, run.name, run.law.label(), rep.note));
        }
    }
    (ok, format!("{} runs, worst margin {worst:.3e} {}", shipped().len(), bad.join("; ")))
}

fn c01_exact_circle() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (run, &p) in circle_runs().iter().zip(&CIRCLE_EXPONENTS) {
        let sol = CircleSolution::new(1.0, p).unwrap();
        let mut err = 0.0_f64;
        for snap in &run.traj.snapshots {
            let exact = sol.state(snap.t()).unwrap().k;
            for &k in snap.curvature.values() {
                err = err.max((k - exact).abs() / exact);
            }
        }
        let om = run.traj.omega.as_ref().unwrap();
        let contains = om.contains(sol.omega());
        let reached = run.traj.final_area_fraction().unwrap() <= 1e-3;
        ok &= err < 1e-6 && contains && om.width() < 1e-6 && reached;
        parts.push(format!("p={p:.4}: k err {err:.1e}, omega {} in [{:.12}, {:.12}] width {:.1e}", sol.omega(), om.omega_lo, om.omega_hi, om.width()));
    }
    outcome(ok, parts.join("; "))
}

fn c02_convergence_order() -> Outcome {
    let law = law(1.0);
    let t_end: f64 = 0.4;
    let exact = 1.0 / (1.0 - 2.0 * t_end).sqrt();
    let dts: [f64; 4] = [0.04, 0.02, 0.01, 0.005];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let steps = (t_end / dt).round() as usize;
            let mut state = FlowState::Curvature(CurvatureProfile::constant(grid(256), 1.0, 0.0).unwrap());
            for _ in 0..steps {
                state = flow::step(&state, &law, dt).unwrap();
            }
            let FlowState::Curvature(kp) = state else { unreachable!() };
            kp.values().iter().map(|k| (k - exact).abs() / exact).fold(0.0, f64::max)
        })
        .collect();
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    outcome((slope - 4.0).abs() <= 0.3, format!("slope {slope:.3} over dt {dts:?}, errors {}", errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ")))
}

fn c03_roundness_ratios() -> Outcome {
    let run = ellipse_run(512);
    let s = &run.traj.last().unwrap().summary;
    let (kr, rr) = (s.k_min / s.k_max, s.r_in / s.r_out);
    let reached = run.traj.final_area_fraction().unwrap() <= 1e-3;
    outcome(kr >= 0.95 && rr >= 0.95 && reached, format!("A/A0 {:.3e}: k_min/k_max {kr:.5}, r_in/r_out {rr:.5}", run.traj.final_area_fraction().unwrap()))
}

fn uniform_blowup_deviation(run: &Shipped) -> f64 {
    let last = run.traj.last().unwrap();
    let omega = run.traj.omega.as_ref().unwrap().omega_mid;
    let scale = (2.0 * (omega - last.t())).sqrt();
    last.curvature.values().iter().map(|k| (k * scale - 1.0).abs()).fold(0.0, f64::max)
}

fn c04_blowup_rate() -> Outcome {
    let d512 = uniform_blowup_deviation(ellipse_run(512));
    let d1024 = uniform_blowup_deviation(ellipse_run(1024));
    outcome(
        d512 <= 0.05 && d1024 <= 0.05 && (d512 - d1024).abs() <= 0.01,
        format!("max|k sqrt(2(omega-t)) - 1| = {d512:.4e} (n=512), {d1024:.4e} (n=1024)"),
    )
}

fn c05_iso_ratio() -> Outcome {
    let (ok, detail) = monitor_on_all(|r| diagnostics::monitor_iso_ratio(&r.traj).unwrap());
    let last = ellipse_run(512).traj.last().unwrap().summary.iso_ratio;
    let rel = (last / (4.0 * PI) - 1.0).abs();
    outcome(ok && rel <= 0.01, format!("non-increasing on {detail}; p=1 ellipse final L^2/A = 4pi(1 + {rel:.2e})"))
}

fn c06_random_profiles() -> Outcome {
    let laws = [law(1.0), law(2.0), law(3.0)];
    let mut violations = Vec::new();
    let mut worst_bonnesen = f64::INFINITY;
    let mut worst_gage = f64::INFINITY;
    let mut worst_chebyshev = f64::INFINITY;
    for seed in 0..100u64 {
        let max_mode = 2 + (seed % 7) as u32;
        let budget = 0.2 + 0.7 * ((seed * 37 % 100) as f64 / 100.0);
        let body = RandomConvexBody::sample(seed, max_mode, budget).unwrap();
        let sp = body.support_profile(grid(256)).unwrap();
        let s = geometry::summarize_support(&sp).unwrap();
        let bonnesen = s.bonnesen_gap / s.iso_ratio;
        let gage = (s.total_curvature - PI * s.length / s.area) / s.total_curvature;
        worst_bonnesen = worst_bonnesen.min(bonnesen);
        worst_gage = worst_gage.min(gage);
        if bonnesen < -1e-8 {
            violations.push(format!("bonnesen seed {seed}"));
        }
        if gage < -1e-10 {
            violations.push(format!("total curvature seed {seed}"));
        }
        let k = geometry::k_from_support(&sp).unwrap();
        let g = sp.grid();
        for law in &laws {
            let gk: Vec<f64> = k.values().iter().map(|&x| law.g(x) * x).collect();
            let gv: Vec<f64> = k.values().iter().map(|&x| law.g(x)).collect();
            let lhs = g.integrate(&gk) / g.integrate(&gv);
            let rhs = g.integrate(k.values()) / (2.0 * PI);
            let margin = (lhs - rhs) / rhs;
            worst_chebyshev = worst_chebyshev.min(margin);
            if margin < -1e-12 {
                violations.push(format!("weighted mean {} seed {seed}", law.label()));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "100 profiles, {} violations; worst margins: bonnesen {worst_bonnesen:.2e}, total curvature {worst_gage:.2e}, weighted mean {worst_chebyshev:.2e} {}",
            violations.len(),
            violations.join(", ")
        ),
    )
}

fn c07_gradient_estimate() -> Outcome {
    let (ok, detail) = monitor_on_all(|r| diagnostics::monitor_gradient_estimate(&r.traj, &r.law).unwrap());
    outcome(ok, detail)
}

fn c08_containment() -> Outcome {
    let law = law(1.0);
    let g = grid(256);
    let outer = SupportProfile::new(g, vec![2.0; 256], 0.0).unwrap();
    let inner = SupportProfile::new(g, vec![1.0; 256], 0.0).unwrap();
    let cfg = ContainmentConfig { cadence: SnapshotCadence::EverySteps(100), ..Default::default() };
    let rep = flow::containment_run(&outer, &inner, &law, &cfg).unwrap();
    let err = rep
        .samples
        .iter()
        .map(|s| (s.min_gap - ((4.0 - 2.0 * s.t).sqrt() - (1.0 - 2.0 * s.t).sqrt())).abs())
        .fold(0.0, f64::max);
    let ellipse = oracle::ellipse_support(2.0, 1.0, g).unwrap();
    let rep2 = flow::containment_run(&outer, &ellipse, &law, &ContainmentConfig::default()).unwrap();
    let worst2 = rep2.samples.iter().map(|s| s.min_gap).fold(f64::INFINITY, f64::min);
    outcome(
        err <= 1e-5 && rep2.holds(),
        format!(
            "concentric: {} samples, max |gap - exact| {err:.2e}; circle over ellipse: {} samples, min gap {worst2:.2e} (tol {:.2e})",
            rep.samples.len(),
            rep2.samples.len(),
            rep2.tolerance
        ),
    )
}

fn c09_hausdorff() -> Outcome {
    let run = ellipse_run(512);
    let h0 = run.traj.first().unwrap().summary.hausdorff;
    let h = run.traj.last().unwrap().summary.hausdorff;
    outcome(h < 0.02, format!("normalized Hausdorff distance {h0:.4} -> {h:.3e}"))
}

fn c10_cross_formulation() -> Outcome {
    let run = cross_run();
    match diagnostics::monitor_cross_formulation(&run.traj) {
        Some(rep) => {
            let worst = rep.values.iter().cloned().fold(0.0, f64::max);
            outcome(rep.passed(), format!("{} snapshots with A >= 0.01 A0, max sup|k_curv - k_supp| {worst:.2e}", rep.values.len()))
        }
        None => outcome(false, "no cross-formulation data".into()),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c11_brute_force() -> Outcome {
    let g = grid(512);
    let vertices = 4096;
    let mut cases: Vec<(String, SupportProfile, Vec<[f64; 2]>)> = vec![
        (
            "circle".into(),
            SupportProfile::new(g, vec![1.0; 512], 0.0).unwrap(),
            (0..vertices).map(|j| {
                let t = 2.0 * PI * j as f64 / vertices as f64;
                [t.cos(), t.sin()]
            }).collect(),
        ),
        (
            "ellipse".into(),
            oracle::ellipse_support(2.0, 1.0, g).unwrap(),
            // h = sqrt(a² cos²θ + b² sin²θ) with normal (sin θ, −cos θ) puts the a-axis along y
            (0..vertices).map(|j| {
                let t = 2.0 * PI * j as f64 / vertices as f64;
                [1.0 * t.cos(), 2.0 * t.sin()]
            }).collect(),
        ),
    ];
    for seed in [101u64, 202, 303] {
        let body = RandomConvexBody::sample(seed, 6, 0.7).unwrap();
        cases.push((format!("random {seed}"), body.support_profile(g).unwrap(), body.polygon(vertices)));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, sp, poly) in cases {
        let s = geometry::summarize_support(&sp).unwrap();
        let b = oracle::polygon_brute_force(&poly).unwrap();
        let scale = (PI / b.area).sqrt();
        let normalized: Vec<[f64; 2]> = poly.iter().map(|p| [p[0] * scale, p[1] * scale]).collect();
        let bh = oracle::polygon_brute_force(&normalized).unwrap().hausdorff_to_unit_disk;
        let errs = [
            rel(s.length, b.length),
            rel(s.area, b.area),
            rel(s.r_in, b.r_in),
            rel(s.r_out, b.r_out),
            // relative to the unit disk's radius
            (s.hausdorff - bh).abs(),
        ];
        let worst = errs.iter().cloned().fold(0.0, f64::max);
        ok &= worst <= 1e-3;
        parts.push(format!("{name} {worst:.1e}"));
    }
    outcome(ok, format!("worst relative disagreement: {}", parts.join(", ")))
}

fn c12_evolution_identities() -> Outcome {
    let (ok, detail) = monitor_on_all(|r| diagnostics::monitor_evolution_identities(&r.traj, &r.law).unwrap());
    outcome(ok, detail)
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        (1, "exact circle solutions and blow-up bracket", c01_exact_circle),
        (2, "RK4 convergence order on the circle", c02_convergence_order),
        (3, "k_min/k_max and r_in/r_out tend to 1", c03_roundness_ratios),
        (4, "k [2(omega - t)]^(1/2) tends to 1 uniformly", c04_blowup_rate),
        (5, "L^2/A non-increasing, limit 4 pi", c05_iso_ratio),
        (6, "Bonnesen, total curvature and weighted-mean inequalities", c06_random_profiles),
        (7, "gradient estimate", c07_gradient_estimate),
        (8, "containment principle", c08_containment),
        (9, "normalized curve converges to the unit disk", c09_hausdorff),
        (10, "curvature and support forms agree", c10_cross_formulation),
        (11, "geometry agrees with polygon brute force", c11_brute_force),
        (12, "dL/dt and dA/dt identities", c12_evolution_identities),
    ];
    std::thread::scope(|s| {
        s.spawn(|| ellipse_run(1024));
        s.spawn(|| ellipse_run(512));
        s.spawn(cross_run);
        s.spawn(other_runs);
        s.spawn(circle_runs);
    });
    let results: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, _, f)| s.spawn(move || std::panic::catch_unwind(f)))
            .collect();
        handles
            .into_iter()
            .map(|h| match h.join().unwrap() {
                Ok(o) => o,
                Err(e) => {
                    let msg = e
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_default();
                    outcome(false, format!("panicked: {msg}"))
                }
            })
            .collect()
    });
    let mut failed = 0;
    for ((num, name, _), res) in criteria.iter().zip(&results) {
        println!("{} criterion {num:>2}: {name}: {}", if res.pass { "PASS" } else { "FAIL" }, res.detail);
        failed += usize::from(!res.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
