//! Acceptance gate: one PASS/FAIL line per criterion.


use lpsflow::analysis::{eoc, pressure_l2_error, velocity_errors, velocity_l2_error, LevelErrors};
use lpsflow::assembly::{StabilizationParams, TauRule};
use lpsflow::cases::{
    mms_exact, mms_pressure_raw, mms_velocity, tgv_exact_energy, MmsCase, RunSetup, TgvCase,
};
use lpsflow::fespace::{CoarseProjectionSpace, TaylorHoodSpace};
use lpsflow::stepper::SchemeVariant;
use lpsflow::stokes_projector::stokes_project;
use std::panic;
use std::time::Instant;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn last_eoc(levels: &[LevelErrors], norm: impl Fn(&LevelErrors) -> f64, by_dt: bool) -> f64 {
    let (a, b) = (&levels[levels.len() - 2], &levels[levels.len() - 1]);
    let (sa, sb) = if by_dt { (a.dt, b.dt) } else { (a.h, b.h) };
    eoc(norm(a), norm(b), sa, sb).unwrap_or(f64::NAN)
}

fn run_mms(re: f64, setup: &RunSetup) -> LevelErrors {
    MmsCase::from_reynolds(re)
        .run(setup)
        .expect("MMS run")
        .errors
}

fn spatial_rates() -> Verdict {
    let levels: Vec<LevelErrors> = [4, 8, 16, 32]
        .iter()
        .map(|&c| run_mms(1.0, &RunSetup::new(c, 1e-3, 1.0)))
        .collect();
    let h1 = last_eoc(&levels, |e| e.velocity_h1, false);
    let l2 = last_eoc(&levels, |e| e.velocity_l2, false);
    let div = last_eoc(&levels, |e| e.divergence, false);
    let p = last_eoc(&levels, |e| e.pressure, false);
    verdict(
        within(h1, 2.0, 0.25)
            && within(l2, 3.0, 0.3)
            && within(div, 2.0, 0.3)
            && within(p, 2.0, 0.3),
        format!("EOC H1 {h1:.3}, L2 {l2:.3}, div {div:.3}, p {p:.3}"),
    )
}

fn temporal_rates() -> Verdict {
    let ladder = [0.1, 0.05, 0.025, 0.0125];
    let run = |variant: SchemeVariant| -> Vec<LevelErrors> {
        ladder
            .iter()
            .map(|&dt| {
                let mut s = RunSetup::new(24, dt, 1.0);
                s.variant = variant;
                run_mms(1.0, &s)
            })
            .collect()
    };
    let inc = run(SchemeVariant::Incremental);
    let rot = run(SchemeVariant::Rotational { chi: 1.0 });
    let inc_l2 = last_eoc(&inc, |e| e.velocity_l2, true);
    let rot_l2 = last_eoc(&rot, |e| e.velocity_l2, true);
    let rot_p = last_eoc(&rot, |e| e.pressure, true);
    verdict(
        inc_l2 >= 1.7 && rot_l2 >= 1.7 && rot_p >= 1.4,
        format!(
            "EOC L2 incremental {inc_l2:.3}, L2 rotational {rot_l2:.3}, p rotational {rot_p:.3}"
        ),
    )
}

fn grad_div_effect() -> Verdict {
    let cells = [4, 8, 16];
    let run = |gamma: f64| -> Vec<LevelErrors> {
        cells
            .iter()
            .map(|&c| {
                let mut s = RunSetup::new(c, 1e-3, 1.0);
                s.params = StabilizationParams::new(gamma, TauRule::SuHalf).unwrap();
                run_mms(100.0, &s)
            })
            .collect()
    };
    let with = run(1.0);
    let without = run(0.0);
    let mut smaller = true;
    let (mut max_h1, mut max_div) = (0.0f64, 0.0f64);
    let mut pressure = Vec::new();
    for (a, b) in with.iter().zip(&without) {
        smaller &= a.velocity_h1 < b.velocity_h1 && a.divergence < b.divergence;
        max_h1 = max_h1.max(b.velocity_h1 / a.velocity_h1);
        max_div = max_div.max(b.divergence / a.divergence);
        pressure.push(format!("{:.2e}/{:.2e}", a.pressure, b.pressure));
    }
    verdict(
        smaller && max_h1 >= 2.0 && max_div >= 2.0,
        format!(
            "max ratio H1 {max_h1:.2}, div {max_div:.2}; pressure gamma=1/gamma=0 {}",
            pressure.join(", ")
        ),
    )
}

fn chi_reduction() -> Verdict {
    let outcome = |variant: SchemeVariant| {
        let mut s = RunSetup::new(8, 0.01, 0.05);
        s.variant = variant;
        MmsCase::from_reynolds(1.0).run(&s).expect("MMS run")
    };
    let a = outcome(SchemeVariant::Incremental);
    let b = outcome(SchemeVariant::Rotational { chi: 0.0 });
    let diff = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    };
    let d = diff(a.state.velocity(), b.state.velocity())
        .max(diff(
            a.state.tentative_velocity(),
            b.state.tentative_velocity(),
        ))
        .max(diff(a.state.pressure(), b.state.pressure()));
    verdict(
        a.log.len() == 5 && d <= 1e-10,
        format!("{} steps, max DOF difference {d:.2e}", a.log.len()),
    )
}

fn projector_rates() -> Verdict {
    let t = 0.5;
    let params = StabilizationParams::default();
    let mut rows = Vec::new();
    for n in [8, 16, 32] {
        let space = TaylorHoodSpace::new(MmsCase::from_reynolds(1.0).mesh(n).unwrap());
        let proj = stokes_project(
            &space,
            params.gamma,
            1.0,
            |x, y| mms_velocity(x, y, t),
            |x, y| mms_exact(x, y, t).1,
        )
        .expect("projection");
        let tab = space.tabulate(6);
        let coarse = CoarseProjectionSpace::new(Default::default(), &tab).unwrap();
        let v = &proj.velocity;
        let e = velocity_errors(&space, &tab, &coarse, &params, 1.0, v, v, |x, y| {
            mms_velocity(x, y, t)
        });
        let l2 = velocity_l2_error(&space, &tab, v, |x, y| mms_velocity(x, y, t).0);
        let p = pressure_l2_error(&space, &tab, &proj.pressure, |x, y| {
            mms_pressure_raw(x, y, t)
        });
        rows.push((space.mesh().h(), l2, e.h1, p));
    }
    let (a, b) = (rows[1], rows[2]);
    let l2 = eoc(a.1, b.1, a.0, b.0).unwrap_or(f64::NAN);
    let h1 = eoc(a.2, b.2, a.0, b.0).unwrap_or(f64::NAN);
    let p = eoc(a.3, b.3, a.0, b.0).unwrap_or(f64::NAN);
    verdict(
        within(h1, 2.0, 0.2) && within(l2, 3.0, 0.3) && within(p, 2.0, 0.2),
        format!("EOC H1 {h1:.3}, L2 {l2:.3}, p {p:.3}"),
    )
}

fn taylor_green_decay() -> Verdict {
    let tgv = TgvCase {
        nu: 1e-3,
        ..TgvCase::default()
    };
    let out = tgv
        .run(&RunSetup::new(32, 1e-3, 1.0))
        .expect("Taylor-Green run");
    let mut worst = 0.0f64;
    for r in &out.log {
        let exact = tgv_exact_energy(r.time, tgv.nu, tgv.a, tgv.b);
        worst = worst.max((r.kinetic_energy - exact).abs() / exact);
    }
    let end = out.log.last().map(|r| r.time).unwrap_or(0.0);
    verdict(
        worst <= 0.01 && (end - 1.0).abs() < 1e-9,
        format!(
            "{} steps to t = {end:.3}, worst relative energy error {worst:.3e}",
            out.log.len()
        ),
    )
}

fn invariant_suite() -> Verdict {
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    let suite = assembly_oracle::SUITE.iter().chain(invariants::SUITE);
    let mut count = 0;
    for (name, check) in suite {
        count += 1;
        if panic::catch_unwind(*check).is_err() {
            failed.push(*name);
        }
    }
    panic::set_hook(hook);
    verdict(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{count} checks")
        } else {
            format!("failed: {}", failed.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("MMS spatial rates", spatial_rates),
        ("MMS temporal rates", temporal_rates),
        ("grad-div effect at Re = 100", grad_div_effect),
        ("rotational chi = 0 reduces to incremental", chi_reduction),
        ("Stokes projector rates", projector_rates),
        ("Taylor-Green energy decay", taylor_green_decay),
        ("invariant suite", invariant_suite),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = match panic::catch_unwind(check) {
            Ok(v) => v,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                verdict(false, format!("panicked: {msg}"))
            }
        };
        failures += usize::from(!v.pass);
        println!(
            "criterion {id} {}: {name}: {} ({:.1} s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
