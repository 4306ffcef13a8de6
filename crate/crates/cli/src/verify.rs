//! Invariant suites behind `rotorlab verify`.

use std::time::Instant;

use clap::ValueEnum;

use rotorlab::goldbug::{
    analytic_ruin_probability, monte_carlo_ruin, GoldbugSystem, ZPhi, PHI_PLUS, STEP_CAP,
};
use rotorlab::idla::{roundness, run_coupled, run_idla};
use rotorlab::render::{render_rotor, render_sandpile};
use rotorlab::rotor::{
    certify, flow_check, loop_imbalance, record_cards, replay_with_cards, run, run_sequential,
    run_swarm, RotorBlob,
};
use rotorlab::sandpile::{containment_against, stabilize, Order, SandVariant};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Level {
    /// A few seconds.
    Quick,
    /// The full suites at desk scale, about a minute.
    Full,
    /// Full, plus the three million bug blob.
    Slow,
}

type Check = Result<String, String>;
type Item = (&'static str, Box<dyn Fn() -> Check>);

fn ensure(ok: bool, fail: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(fail())
    }
}

fn e2s(e: rotorlab::Error) -> String {
    e.to_string()
}

fn goldbug_splits() -> Check {
    let mut g = GoldbugSystem::new();
    let mut done = 0;
    for (n, want) in [(5u64, (3, 2)), (8, (5, 3)), (13, (8, 5)), (117, (72, 45))] {
        let got = g.run_bugs(n - done).map_err(e2s)?;
        done = n;
        ensure(got == want, || format!("n={n}: got {got:?}, want {want:?}"))?;
    }
    Ok("5, 8, 13, 117 bugs".into())
}

fn goldbug_identities(bugs: u64, ratio_bugs: u64) -> Check {
    let mut g = GoldbugSystem::new();
    for n in 1..=ratio_bugs {
        if n <= bugs {
            // the injected bug sits at 0 and carries phi
            let mut prev = g.system_value().map_err(e2s)? + ZPhi::new(1, 1);
            let mut drift = false;
            g.run_bug_observed(STEP_CAP, |s| {
                let v = s.system_value().expect("sites stay in range");
                drift |= v != prev;
                prev = v;
            })
            .map_err(e2s)?;
            ensure(!drift, || format!("value changed during bug {n}"))?;
            let decoded = (
                g.fib_decode(0).map_err(e2s)?,
                g.fib_decode(1).map_err(e2s)?,
                g.fib_decode(2).map_err(e2s)?,
            );
            ensure(decoded == (n, g.cup_left(), g.cup_right()), || {
                format!("n={n}: decoded {decoded:?}")
            })?;
            ensure(g.digits_have_no_double_zero(), || {
                format!("n={n}: adjacent Outbound arrows")
            })?;
        } else {
            g.run_bug().map_err(e2s)?;
        }
        let (a, b) = (g.cup_left() as f64, g.cup_right() as f64);
        ensure(a == 0.0 || (b / a - 1.0 / PHI_PLUS).abs() < 1.0 / a, || {
            format!("n={n}: ratio off")
        })?;
    }
    Ok(format!(
        "digits and value for {bugs} bugs, cup ratio for {ratio_bugs}"
    ))
}

fn ruin(trials: u64) -> Check {
    let mc = monte_carlo_ruin(1, trials, 0).map_err(e2s)?;
    let z = (mc.estimate - 1.0 / PHI_PLUS).abs() / mc.stderr;
    ensure(z < 3.0, || {
        format!("estimate {} is {z:.2} standard errors off", mc.estimate)
    })?;
    let p = |i: i64| match i {
        -1 => Ok(1.0),
        0 => Ok(0.0),
        _ => analytic_ruin_probability(i),
    };
    for i in 1..=30 {
        let r = (p(i + 1).map_err(e2s)? + p(i - 2).map_err(e2s)?) / 2.0 - p(i).map_err(e2s)?;
        ensure(r.abs() < 1e-12, || {
            format!("recurrence residual {r} at {i}")
        })?;
    }
    Ok(format!("estimate {:.5} over {trials} walks", mc.estimate))
}

fn rotor_fast_path(sizes: &[u64]) -> Check {
    for &n in sizes {
        let (fast, _) = run(n).map_err(e2s)?;
        ensure(certify(&fast), || format!("n={n}: certificate failed"))?;
        ensure(fast == run_sequential(n).map_err(e2s)?, || {
            format!("n={n}: differs from hop-by-hop run")
        })?;
    }
    Ok(format!("n in {sizes:?}"))
}

fn flow(sizes: &[u64]) -> Check {
    for &n in sizes {
        let (b, _) = run(n).map_err(e2s)?;
        let v = flow_check(&b);
        ensure(v.is_empty(), || format!("n={n}: {:?}", v[0]))?;
    }
    Ok(format!("n in {sizes:?}"))
}

fn swarm(max_n: u64, seeds: u64) -> Check {
    let mut blob = RotorBlob::new();
    for n in 1..=max_n {
        blob.add_bug().map_err(e2s)?;
        for seed in 0..seeds {
            ensure(run_swarm(n, seed).map_err(e2s)? == blob, || {
                format!("n={n} seed={seed}")
            })?;
        }
    }
    Ok(format!("n <= {max_n}, {seeds} seeds"))
}

fn replay(sizes: &[u64], seeds: u64) -> Check {
    for &n in sizes {
        let cards = record_cards(n).map_err(e2s)?;
        let occ = run(n).map_err(e2s)?.0.occupied_sites();
        for seed in 0..seeds {
            let r = replay_with_cards(&cards, n, seed).map_err(e2s)?;
            ensure(r.occupied == occ, || {
                format!("n={n} seed={seed}: occupancy differs")
            })?;
            ensure(loop_imbalance(&r.leftover).is_empty(), || {
                format!("n={n} seed={seed}: leftovers unbalanced")
            })?;
        }
    }
    Ok(format!("n in {sizes:?}, {seeds} seeds"))
}

fn sandpile_orders(sizes: &[u64], seeds: u64) -> Check {
    for variant in [SandVariant::Greedy, SandVariant::Standard] {
        for &n in sizes {
            let base = stabilize(n, variant, Order::Systematic).map_err(e2s)?;
            for seed in 0..seeds {
                let other = stabilize(n, variant, Order::Random(seed)).map_err(e2s)?;
                ensure(other == base, || {
                    format!("{variant:?} n={n} order seed {seed}")
                })?;
            }
        }
    }
    Ok(format!(
        "both variants, n in {sizes:?}, {seeds} random orders"
    ))
}

fn containment(sizes: &[u64], coupled_seeds: u64) -> Check {
    for &n in sizes {
        let pile = stabilize(n, SandVariant::Greedy, Order::Systematic).map_err(e2s)?;
        let r = containment_against(&pile, &run(n).map_err(e2s)?.0);
        ensure(r.holds(), || {
            format!(
                "n={n}: greedy pile leaves the blob at {:?}",
                r.violations[0]
            )
        })?;
    }
    let n = 1000;
    let cards = record_cards(n).map_err(e2s)?;
    let (blob, _) = run(n).map_err(e2s)?;
    let mut settled = 0;
    for seed in 0..coupled_seeds {
        let c = run_coupled(&cards, n, seed);
        ensure(c.settled_set.iter().all(|p| blob.is_occupied(*p)), || {
            format!("coupled seed {seed} left the blob")
        })?;
        settled += c.settled;
    }
    Ok(format!(
        "greedy n in {sizes:?}; coupled IDLA settled {:.3} of {n}",
        settled as f64 / (coupled_seeds * n) as f64
    ))
}

fn idla_round(n: u64, seeds: u64) -> Check {
    let (mut din, mut dout, mut r) = (0.0, 0.0, 0.0);
    for seed in 0..seeds {
        let rep = roundness(&run_idla(n, seed).map_err(e2s)?);
        din += rep.delta_in / seeds as f64;
        dout += rep.delta_out / seeds as f64;
        r = rep.r_eff;
    }
    ensure(din < 0.05 * r && dout < 0.05 * r, || {
        format!("mean deltas {din:.3}, {dout:.3} against r {r:.2}")
    })?;
    Ok(format!(
        "n={n}, {seeds} seeds: mean delta_in {din:.3}, delta_out {dout:.3}, r {r:.2}"
    ))
}

fn render_repeatable() -> Check {
    let a = render_rotor(&run(1000).map_err(e2s)?.0).to_ppm();
    let b = render_rotor(&run_sequential(1000).map_err(e2s)?).to_ppm();
    ensure(a == b, || "rotor picture depends on the solver".into())?;
    for v in [SandVariant::Greedy, SandVariant::Standard] {
        let x = render_sandpile(&stabilize(1000, v, Order::Systematic).map_err(e2s)?).to_ppm();
        let y = render_sandpile(&stabilize(1000, v, Order::Random(1)).map_err(e2s)?).to_ppm();
        ensure(x == y, || format!("{v:?} picture depends on the order"))?;
    }
    Ok("rotor and both sandpiles at n=1000".into())
}

fn three_million() -> Check {
    let (_, s) = run(3_000_000).map_err(e2s)?;
    let max = s.max_occupied_dist2.unwrap_or(-1);
    ensure(max == 956_609 && s.min_vacant_dist2 == 953_461, || {
        format!("max {max}, min {}", s.min_vacant_dist2)
    })?;
    Ok(format!(
        "max dist2 {max}, min vacant dist2 {}, gap {:.4}",
        s.min_vacant_dist2,
        s.gap()
    ))
}

pub fn run_suites(level: Level) -> Result<(), Failure> {
    let full = level >= Level::Full;
    let mut items: Vec<Item> = vec![
        ("goldbug splits", Box::new(goldbug_splits)),
        (
            "goldbug identities",
            Box::new(move || {
                if full {
                    goldbug_identities(10_000, 100_000)
                } else {
                    goldbug_identities(2_000, 10_000)
                }
            }),
        ),
        (
            "ruin probability",
            Box::new(move || ruin(if full { 1_000_000 } else { 100_000 })),
        ),
        (
            "rotor fast path",
            Box::new(move || {
                rotor_fast_path(if full {
                    &[1, 5, 100, 1000, 10_000, 50_000]
                } else {
                    &[1, 5, 100, 1000]
                })
            }),
        ),
        (
            "rotor flow",
            Box::new(move || {
                flow(if full {
                    &[100, 1000, 10_000, 100_000]
                } else {
                    &[100, 1000, 10_000]
                })
            }),
        ),
        (
            "swarm order",
            Box::new(move || if full { swarm(500, 20) } else { swarm(100, 3) }),
        ),
        (
            "card replay",
            Box::new(move || {
                if full {
                    replay(&[100, 1000], 10)
                } else {
                    replay(&[100], 3)
                }
            }),
        ),
        (
            "sandpile order",
            Box::new(move || {
                if full {
                    sandpile_orders(&[100, 1000, 10_000], 10)
                } else {
                    sandpile_orders(&[100, 1000], 3)
                }
            }),
        ),
        (
            "containment",
            Box::new(move || {
                containment(
                    if full {
                        &[100, 1000, 10_000]
                    } else {
                        &[100, 1000]
                    },
                    if full { 10 } else { 3 },
                )
            }),
        ),
        ("render repeatability", Box::new(render_repeatable)),
    ];
    if full {
        items.push(("IDLA roundness", Box::new(|| idla_round(10_000, 20))));
    }
    if level == Level::Slow {
        items.push(("three million bugs", Box::new(three_million)));
    }
    let mut failed = Vec::new();
    for (name, check) in &items {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(why) => {
                println!("FAIL {name}: {why} ({secs:.1}s)");
                failed.push(*name);
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("failed: {}", failed.join(", "))))
    }
}
