//! The experiment drivers. Each returns a [`ResultRecord`]; replicas run in
//! parallel and are collected in replica order, so records are reproducible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clocks::{level_local_time_from_skeleton, srw_local_time, ExcursionTracker, LevelExcursionCounter, TauTracker};
use crate::criticality::{peierls_bound, star_saw_count, threshold_scan, write_thresholds};
use crate::geometry::{block_sites, BlockKind, BlockSpec, Cylinder, Site};
use crate::returnprob::{q_monte_carlo_staged, q_quadrature, truncation_bias_bound, StagedPlan};
use crate::rng::StepRng;
use crate::stats::{bootstrap_loglog_slope, chi_square_two_sample, ecdf_sup_distance, ks_two_sample, ols, summarize, wilson};
use crate::vacant::{
    check_u, check_v, disconnection_time, offset_count, segment_length, segment_linkage, DisconnectionRun, PlaneScope, PrefixView,
};
use crate::walk::{StepCapReached, StoreOptions, TrajectoryStore, WalkConfig};
use crate::zlattice::walk_z;

use super::config::{ExperimentConfig, ExperimentKind, UTimes};
use super::record::{Cell, Check, ResultRecord, Table};
use super::HarnessError;

const Z95: f64 = 1.959_963_984_540_054;

/// Replica stream for side `n`: distinct sides never share a stream.
fn stream(side: u32, replica: u64) -> u64 {
    (u64::from(side) << 32) | replica
}

fn pow(n: u32, e: usize) -> f64 {
    f64::from(n).powi(e as i32)
}

fn walk_config(cfg: &ExperimentConfig, side: u32) -> WalkConfig {
    WalkConfig {
        d: cfg.d,
        side,
        seed: cfg.seed,
        start: cfg.start,
        step_cap: Some(cfg.budget),
    }
}

/// Expected steps per replica at the largest side, for the budget check.
/// `None` for purely numerical experiments.
pub fn estimate_steps(cfg: &ExperimentConfig) -> Option<u64> {
    let d = cfg.d;
    let per_side = |n: u32| -> f64 {
        let n2d = pow(n, 2 * d);
        let d1 = (d + 1) as f64;
        match cfg.experiment {
            ExperimentKind::Disconnect | ExperimentKind::Scaling => 4.0 * n2d,
            ExperimentKind::Excursions => {
                let g = cfg.excursions.gammas.iter().copied().fold(0.0, f64::max);
                g * n2d * d1.mul_add(cfg.excursions.local_time_factor, 0.0).max(1.0)
            }
            ExperimentKind::Events | ExperimentKind::Expbound => {
                let u = match cfg.experiment {
                    ExperimentKind::Events => cfg.events.us.iter().copied().fold(0.0, f64::max),
                    _ => cfg.expbound.u,
                };
                // far passages are sampled in one draw, so each excursion
                // costs about the time spent inside B̃_j
                let t = u * pow(n, d - 1);
                8.0 * d1 * pow(n, 2) * (t + 4.0)
            }
            ExperimentKind::Localtime => {
                let k = cfg.localtime.ks.iter().copied().max().unwrap_or(0) as f64;
                d1 * pow(n, 2) * (k + 1.0)
            }
            ExperimentKind::Qtable | ExperimentKind::Thresholds | ExperimentKind::Peierls => 0.0,
        }
    };
    match cfg.experiment {
        ExperimentKind::Qtable | ExperimentKind::Thresholds | ExperimentKind::Peierls => None,
        _ => Some(cfg.sides.iter().map(|&n| per_side(n)).fold(0.0, f64::max).min(u64::MAX as f64) as u64),
    }
}

/// Runs the configured experiment after validating it and checking its
/// budget.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultRecord, HarnessError> {
    cfg.validate()?;
    if let Some(estimate) = estimate_steps(cfg) {
        if estimate > cfg.budget {
            return Err(HarnessError::Budget {
                estimate,
                budget: cfg.budget,
            });
        }
    }
    match cfg.experiment {
        ExperimentKind::Disconnect | ExperimentKind::Scaling => run_disconnect(cfg),
        ExperimentKind::Excursions => run_excursion_budget(cfg),
        ExperimentKind::Events => run_vacant_events(cfg),
        ExperimentKind::Expbound => run_exponential_bound(cfg),
        ExperimentKind::Localtime => run_localtime_identity(cfg),
        ExperimentKind::Qtable => run_qtable(cfg),
        ExperimentKind::Thresholds => run_thresholds(cfg),
        ExperimentKind::Peierls => run_peierls(cfg),
    }
}

/// Disconnection times for every side, the distribution of `N^{2d}/T_N`,
/// and the regression of `log median T_N` on `log N`.
pub fn run_disconnect(cfg: &ExperimentConfig) -> Result<ResultRecord, HarnessError> {
    let d = cfg.d;
    let mut rec = ResultRecord::new(cfg);
    let mut runs_t = Table::new("replicas", &["N", "replica", "T_N", "censored", "steps", "visited", "checks"]);
    let mut summary_t = Table::new(
        "summary",
        &[
            "N", "runs", "censored", "median_T", "q25_T", "q75_T", "ratio_q05", "ratio_q25", "ratio_median", "ratio_q75", "ratio_q95",
        ],
    );
    let mut cdf_t = Table::new("ratio_cdf", &["N", "ratio", "F"]);
    let mut censored = 0;
    let mut lower_bound_ok = true;
    let mut fit_x = Vec::new();
    let mut groups = Vec::new();
    let mut ratios: Vec<(u32, Vec<f64>)> = Vec::new();

    for &n in &cfg.sides {
        let wc = walk_config(cfg, n);
        let cadence = cfg.cadence_for(n);
        let runs: Vec<DisconnectionRun> = (0..cfg.replicas)
            .into_par_iter()
            .map(|r| disconnection_time(&wc, stream(n, r), cadence))
            .collect::<Result<_, _>>()?;
        let floor = u64::from(n).pow(d as u32) - 1;
        let mut times = Vec::new();
        for (r, run) in runs.iter().enumerate() {
            let t = run.time.at();
            if let Some(t) = t {
                lower_bound_ok &= t >= floor;
                times.push(t as f64);
            } else {
                censored += 1;
            }
            runs_t.push(vec![
                n.into(),
                r.into(),
                t.into(),
                t.is_none().into(),
                run.steps.into(),
                run.visited.into(),
                run.checks.into(),
            ]);
        }
        let scale = pow(n, 2 * d);
        let mut ratio: Vec<f64> = times.iter().map(|t| scale / t).collect();
        ratio.sort_by(f64::total_cmp);
        for (i, x) in ratio.iter().enumerate() {
            cdf_t.push(vec![n.into(), (*x).into(), ((i + 1) as f64 / ratio.len() as f64).into()]);
        }
        let ts = summarize(&times);
        let rs = summarize(&ratio);
        summary_t.push(vec![
            n.into(),
            cfg.replicas.into(),
            (cfg.replicas - times.len() as u64).into(),
            ts.map(|s| s.median).into(),
            ts.map(|s| s.q25).into(),
            ts.map(|s| s.q75).into(),
            rs.map(|s| s.q05).into(),
            rs.map(|s| s.q25).into(),
            rs.map(|s| s.median).into(),
            rs.map(|s| s.q75).into(),
            rs.map(|s| s.q95).into(),
        ]);
        if !times.is_empty() {
            fit_x.push(f64::from(n));
            groups.push(times);
        }
        ratios.push((n, ratio));
    }

    let mut scaling_t = Table::new("scaling", &["N", "log_N", "median_T", "log_median_T"]);
    for (x, g) in fit_x.iter().zip(&groups) {
        let m = summarize(g).expect("nonempty").median;
        scaling_t.push(vec![(*x as u32).into(), x.ln().into(), m.into(), m.ln().into()]);
    }
    if fit_x.len() >= 2 {
        let lx: Vec<f64> = fit_x.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = groups.iter().map(|g| summarize(g).expect("nonempty").median.ln()).collect();
        let fit = ols(&lx, &ly).expect("distinct sides");
        rec.summary.insert("exponent".into(), fit.slope.into());
        rec.summary.insert("exponent_r_squared".into(), fit.r_squared.into());
        if let Some((lo, hi)) = bootstrap_loglog_slope(&fit_x, &groups, 500, 0.95, cfg.seed) {
            rec.summary.insert("exponent_ci_lo".into(), lo.into());
            rec.summary.insert("exponent_ci_hi".into(), hi.into());
        }
        rec.summary.insert("expected_exponent".into(), ((2 * d) as f64).into());
    }
    let mut ecdf_t = Table::new("ecdf_distance", &["N_a", "N_b", "sup_distance"]);
    let mut worst: f64 = 0.0;
    for w in ratios.windows(2) {
        if w[0].1.is_empty() || w[1].1.is_empty() {
            continue;
        }
        let dist = ecdf_sup_distance(&w[0].1, &w[1].1);
        worst = worst.max(dist);
        ecdf_t.push(vec![w[0].0.into(), w[1].0.into(), dist.into()]);
    }
    if !ecdf_t.rows.is_empty() {
        rec.summary.insert("max_ecdf_distance".into(), worst.into());
    }
    rec.checks.push(Check::new(
        "lower_bound",
        lower_bound_ok,
        "T_N ≥ N^d − 1 on every completed run",
    ));
    rec.set_counts(cfg.replicas * cfg.sides.len() as u64, censored);
    rec.tables = vec![runs_t, summary_t, scaling_t, ecdf_t, cdf_t];
    Ok(rec)
}

/// Probability of `𝒟_{γ,t} = ∩_j {D^j_t > γN^{2d}}`, `t = uN^{d−1}`, on a
/// grid of `γ`. Unvisited levels satisfy the event vacuously, so it holds iff
/// no level completes `[t]` departures by time `γN^{2d}`.
pub fn run_excursion_budget(cfg: &ExperimentConfig) -> Result<ResultRecord, HarnessError> {
    let p = &cfg.excursions;
    let d = cfg.d;
    let mut rec = ResultRecord::new(cfg);
    let mut gammas = p.gammas.clone();
    gammas.sort_by(f64::total_cmp);
    let g_max = *gammas.last().expect("validated nonempty");
    let mut table = Table::new(
        "gamma",
        &["N", "gamma", "time", "runs", "censored", "P_D", "ci_lo", "ci_hi", "local_time_index", "P_local_time_below_half"],
    );
    let mut censored_total = 0;
    let mut monotone = true;
    for &n in &cfg.sides {
        let t_idx = (p.u * pow(n, d - 1)).floor() as u64;
        let scale = pow(n, 2 * d);
        let horizon = (g_max * scale).ceil() as u64;
        let lt_idx: Vec<u64> = gammas
            .iter()
            .map(|g| (p.local_time_factor * g * pow(n, 2 * d - 2)).floor() as u64)
            .collect();
        let lt_need = lt_idx.iter().copied().max().unwrap_or(0) as usize + 1;
        let wc = walk_config(cfg, n);

        // per replica: first time some level completes [t] departures (if
        // within the horizon), and the τ-skeleton
        let outcomes: Vec<(Option<u64>, Vec<i64>, bool)> = (0..cfg.replicas)
            .into_par_iter()
            .map(|r| {
                let mut walk = wc.open_height(stream(n, r))?;
                let mut counter = LevelExcursionCounter::new(n);
                let mut taus = TauTracker::levels_only(n);
                counter.observe(walk.z());
                taus.observe(0, walk.z());
                let mut first = (t_idx == 0).then_some(0);
                while (first.is_none() && walk.time() < horizon) || taus.count() < lt_need {
                    if walk.time() >= cfg.budget {
                        return Ok((first, taus.skeleton().to_vec(), true));
                    }
                    let z = walk.step();
                    counter.observe(z);
                    taus.observe(walk.time(), z);
                    if first.is_none() && counter.max_departures() >= t_idx {
                        first = Some(walk.time());
                    }
                }
                Ok((first, taus.skeleton().to_vec(), false))
            })
            .collect::<Result<_, HarnessError>>()?;
        let censored = outcomes.iter().filter(|o| o.2).count() as u64;
        censored_total += censored;
        let mut prev = 1.0;
        for (gi, &g) in gammas.iter().enumerate() {
            let time = (g * scale).floor() as u64;
            let mut runs = 0u64;
            let mut hold = 0u64;
            let mut lt_runs = 0u64;
            let mut lt_hold = 0u64;
            for (first, skeleton, capped) in &outcomes {
                // a capped run still decides the event if it got past `time`
                let decided = first.is_some() || !capped;
                if decided {
                    runs += 1;
                    hold += u64::from(first.is_none_or(|f| f > time));
                }
                if let Some(lt) = level_local_time_from_skeleton(skeleton, lt_idx[gi] as f64).at() {
                    lt_runs += 1;
                    lt_hold += u64::from((lt.max() as f64) < 0.5 * t_idx as f64);
                }
            }
            let pd = hold as f64 / runs.max(1) as f64;
            monotone &= pd <= prev + 1e-12;
            prev = pd;
            let (lo, hi) = wilson(hold, runs, Z95);
            table.push(vec![
                n.into(),
                g.into(),
                time.into(),
                runs.into(),
                (cfg.replicas - runs).into(),
                pd.into(),
                lo.into(),
                hi.into(),
                lt_idx[gi].into(),
                (lt_runs > 0).then(|| lt_hold as f64 / lt_runs as f64).into(),
            ]);
        }
        // largest γ on the grid with P ≥ 0.9
        let i_n = table.column("N").expect("column");
        let star = table
            .rows
            .iter()
            .filter(|r| r[i_n] == Cell::from(n) && r[5].as_f64().is_some_and(|x| x >= 0.9))
            .filter_map(|r| r[1].as_f64())
            .fold(None, |a: Option<f64>, g| Some(a.map_or(g, |a| a.max(g))));
        rec.summary.insert(format!("gamma_star_N{n}"), star.into());
        rec.summary.insert(format!("t_N{n}"), t_idx.into());
    }
    rec.checks.push(Check::new("monotone_in_gamma", monotone, "P[𝒟_γ] nonincreasing in γ"));
    rec.set_counts(cfg.replicas * cfg.sides.len() as u64, censored_total);
    rec.tables = vec![table];
    Ok(rec)
}

/// One move of the walk. Just after a departure from `B̃_j`, the passage
/// back towards `B_j` is sampled in one draw, stopping at the boundary of
/// `B_j` or just outside the store's window, whichever comes first. The
/// excursion clocks only need the departure and the return, and nothing
/// recorded is visited in between; otherwise a single step.
fn advance_skipping(store: &mut TrajectoryStore, rng: &mut StepRng, level: i64, side: u32) -> Result<Site, StepCapReached> {
    let n = i64::from(side);
    let z = i64::from(store.position().z);
    let (lo, hi) = store.visited().window().map_or((i64::MIN / 4, i64::MAX / 4), |(lo, hi)| (i64::from(lo), i64::from(hi)));
    let rel = z - level * n;
    if rel >= 2 * n {
        let target = ((level + 1) * n).max(hi + 1);
        if target < z {
            return store.jump_to_height(rng, target as i32);
        }
    } else if rel <= -2 * n {
        let target = ((level - 1) * n).min(lo - 1);
        if target > z {
            return store.jump_to_height(rng, target as i32);
        }
    }
    store.advance(rng)
}

/// One evaluation of the vacant-set events at `n = D^j_[t]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventOutcome {
    pub n: u64,
    pub v: bool,
    pub u: bool,
    pub lines_have_segments: bool,
    pub segments_linked: bool,
}

impl EventOutcome {
    pub fn g(&self) -> bool {
        self.v && self.u
    }

    pub fn linkage(&self) -> bool {
        self.lines_have_segments && self.segments_linked
    }
}

/// The JSON record emitted per event evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seed: u64,
    pub d: usize,
    #[serde(rename = "N")]
    pub side: u32,
    pub j: i64,
    pub u_or_t: f64,
    pub event: String,
    pub value: Option<bool>,
    pub censored: bool,
}

/// Events `𝒱`, `𝒰`, `𝒢` and the linkage conclusions for one replica, at
/// `D^j_[t]` for each `t = uN^{d−1}` of the grid (`None` when censored).
pub fn events_replica(cfg: &ExperimentConfig, side: u32, replica: u64) -> Result<Vec<Option<EventOutcome>>, HarnessError> {
    let p = &cfg.events;
    let d = cfg.d;
    let cyl = Cylinder::new(d, side)?;
    let level = p.level;
    let heights = block_sites(BlockSpec::new(level, side, BlockKind::C));
    let len = segment_length(p.k, side);
    let reach = i64::from(offset_count(side)) - 1 + i64::from(len);
    let window = heights.widened(reach);
    let scope = p.plane_scope(side, cfg.seed ^ replica);
    let opts = StoreOptions {
        window: Some((window.lo as i32, window.hi as i32)),
        ..StoreOptions::default()
    };
    let (mut store, mut rng) = walk_config(cfg, side).open(stream(side, replica), opts)?;
    let targets: Vec<usize> = p.us.iter().map(|u| (u * pow(side, d - 1)).floor() as usize).collect();
    let k_max = targets.iter().copied().max().unwrap_or(0);
    let mut tracker = ExcursionTracker::new(level, side, Some(k_max));
    tracker.observe(0, i64::from(store.position().z));
    let mut results: Vec<Option<EventOutcome>> = vec![None; targets.len()];

    let mut u_cumulative = true;
    let mut evaluate = |store: &crate::walk::TrajectoryStore, departures: usize, u_cumulative: &mut bool| -> Result<(), HarnessError> {
        let n = store.time();
        let view = PrefixView::new(store.visited(), n);
        if p.u_times == UTimes::ExcursionBoundaries {
            *u_cumulative &= check_u(&cyl, &view, p.k, level, scope)?.holds;
        }
        for (i, &idx) in targets.iter().enumerate() {
            if idx != departures {
                continue;
            }
            let v = check_v(&cyl, &view, p.k, level, p.directions)?.holds;
            let u = match p.u_times {
                UTimes::FinalOnly => check_u(&cyl, &view, p.k, level, scope)?.holds,
                UTimes::ExcursionBoundaries => *u_cumulative,
            };
            let link = segment_linkage(&cyl, &view, level, len)?;
            results[i] = Some(EventOutcome {
                n,
                v,
                u,
                lines_have_segments: link.lines_have_segments,
                segments_linked: link.segments_linked,
            });
        }
        Ok(())
    };

    // D^j_0 = 0
    evaluate(&store, 0, &mut u_cumulative)?;
    let mut seen = 0;
    while seen < k_max {
        let Ok(s) = advance_skipping(&mut store, &mut rng, level, side) else { break };
        tracker.observe(store.time(), i64::from(s.z));
        let deps = tracker.ledger().departures.len();
        if deps > seen {
            seen = deps;
            evaluate(&store, deps, &mut u_cumulative)?;
        }
    }
    Ok(results)
}

/// Whether the linkage conclusions are expected to follow from `𝒢` at this
/// size: every plane is inspected, segments are shorter than half the torus,
/// and a vertical segment with its offset fits in `C_j`.
pub fn linkage_applicable(cfg: &ExperimentConfig, side: u32) -> bool {
    let len = segment_length(cfg.events.k, side);
    let c = block_sites(BlockSpec::new(cfg.events.level, side, BlockKind::C));
    matches!(cfg.events.plane_scope(side, 0), PlaneScope::All)
        && 2 * len <= side
        && u64::from(offset_count(side) + len) < c.len()
}

/// Empirical probabilities of `𝒱`, `𝒰`, `𝒢` and the linkage conclusions on
/// a grid of `u`, with the implication `𝒢 ⇒ linkage` checked on every run.
pub fn run_vacant_events(cfg: &ExperimentConfig) -> Result<ResultRecord, HarnessError> {
    let p = &cfg.events;
    let mut rec = ResultRecord::new(cfg);
    let mut runs_t = Table::new(
        "replicas",
        &["N", "replica", "u", "t", "n", "V", "U", "G", "lines", "linked", "censored"],
    );
    let mut prob_t = Table::new(
        "probabilities",
        &["N", "u", "t", "runs", "censored", "P_V", "P_U", "P_G", "P_linkage", "implication_violations"],
    );
    let mut records = Vec::new();
    let mut censored_total = 0;
    let mut g_le_min = true;
    let mut v_monotone = true;
    let mut violations_total = 0;
    let mut implication_checked = false;
    // evaluate in increasing u so per-replica monotonicity can be checked
    let mut order: Vec<usize> = (0..p.us.len()).collect();
    order.sort_by(|&a, &b| p.us[a].total_cmp(&p.us[b]));

    for &n in &cfg.sides {
        let applicable = linkage_applicable(cfg, n);
        implication_checked |= applicable;
        let all: Vec<Vec<Option<EventOutcome>>> = (0..cfg.replicas)
            .into_par_iter()
            .map(|r| events_replica(cfg, n, r))
            .collect::<Result<_, _>>()?;
        for (r, res) in all.iter().enumerate() {
            let mut prev_v = true;
            for &i in &order {
                let u = p.us[i];
                let t = u * pow(n, cfg.d - 1);
                let o = res[i];
                if let Some(o) = o {
                    v_monotone &= prev_v || !o.v;
                    prev_v = o.v;
                }
                runs_t.push(vec![
                    n.into(),
                    r.into(),
                    u.into(),
                    t.into(),
                    o.map(|o| o.n).into(),
                    o.map(|o| o.v).into(),
                    o.map(|o| o.u).into(),
                    o.map(|o| o.g()).into(),
                    o.map(|o| o.lines_have_segments).into(),
                    o.map(|o| o.segments_linked).into(),
                    o.is_none().into(),
                ]);
                for (name, value) in [
                    ("V", o.map(|o| o.v)),
                    ("U", o.map(|o| o.u)),
                    ("G", o.map(|o| o.g())),
                    ("linkage", o.map(|o| o.linkage())),
                ] {
                    records.push(EventRecord {
                        seed: cfg.seed,
                        d: cfg.d,
                        side: n,
                        j: p.level,
                        u_or_t: u,
                        event: name.into(),
                        value,
                        censored: o.is_none(),
                    });
                }
            }
        }
        for &i in &order {
            let u = p.us[i];
            let done: Vec<EventOutcome> = all.iter().filter_map(|res| res[i]).collect();
            let runs = done.len() as f64;
            let frac = |f: &dyn Fn(&EventOutcome) -> bool| (runs > 0.0).then(|| done.iter().filter(|o| f(o)).count() as f64 / runs);
            let (pv, pu, pg) = (frac(&|o| o.v), frac(&|o| o.u), frac(&|o| o.g()));
            if let (Some(pv), Some(pu), Some(pg)) = (pv, pu, pg) {
                g_le_min &= pg <= pv.min(pu);
            }
            let violations = if applicable {
                done.iter().filter(|o| o.g() && !o.linkage()).count() as u64
            } else {
                0
            };
            violations_total += violations;
            let censored = cfg.replicas - done.len() as u64;
            censored_total += censored;
            prob_t.push(vec![
                n.into(),
                u.into(),
                (u * pow(n, cfg.d - 1)).into(),
                (done.len() as u64).into(),
                censored.into(),
                pv.into(),
                pu.into(),
                pg.into(),
                frac(&|o| o.linkage()).into(),
                if applicable { Cell::from(violations) } else { Cell::Missing },
            ]);
        }
    }
    rec.checks.push(Check::new("g_le_min", g_le_min, "P[𝒢] ≤ min(P[𝒱], P[𝒰]) at every grid point"));
    rec.checks.push(Check::new(
        "v_monotone_in_u",
        v_monotone,
        "on every replica, 𝒱 at a larger u implies 𝒱 at a smaller u",
    ));
    rec.checks.push(Check::new(
        "g_implies_linkage",
        violations_total == 0,
        if implication_checked {
            format!("{violations_total} runs with 𝒢 but without the linkage conclusions")
        } else {
            "not applicable at these sizes (sampled planes or segments too long)".to_string()
        },
    ));
    // largest grid u with P[𝒱] ≥ 0.9, per side
    let (iu, iv, i_n) = (prob_t.column("u"), prob_t.column("P_V"), prob_t.column("N"));
    for &n in &cfg.sides {
        let star = prob_t
            .rows
            .iter()
            .filter(|r| r[i_n.expect("column")] == Cell::from(n))
            .filter(|r| r[iv.expect("column")].as_f64().is_some_and(|v| v >= 0.9))
            .filter_map(|r| r[iu.expect("column")].as_f64())
            .fold(None, |a: Option<f64>, u| Some(a.map_or(u, |a| a.max(u))));
        rec.summary.insert(format!("u_star_N{n}"), star.into());
    }
    rec.summary.insert("segment_length".into(), segment_length(p.k, cfg.sides[0]).into());
    rec.summary.insert("implication_checked".into(), implication_checked.into());
    rec.summary.insert("implication_violations".into(), violations_total.into());
    rec.set_counts(cfg.replicas * cfg.sides.len() as u64 * p.us.len() as u64, censored_total);
    rec.tables = vec![runs_t, prob_t, event_records_table(&records)];
    Ok(rec)
}

fn event_records_table(records: &[EventRecord]) -> Table {
    let mut t = Table::new("event_records", &["seed", "d", "N", "j", "u_or_t", "event", "value", "censored"]);
    for e in records {
        t.push(vec![
            e.seed.into(),
            e.d.into(),
            e.side.into(),
            e.j.into(),
            e.u_or_t.into(),
            e.event.as_str().into(),
            e.value.into(),
            e.censored.into(),
        ]);
    }
    t
}

/// Square spiral (for `m = 2`) or a line along `e_1` (for `m = 1`) of
/// `size` sites around the torus centre, in the plane at height `jN`.
/// Prefixes of the list are the nested sets `A_1 ⊂ A_2 ⊂ …`.
pub fn planar_shape(cyl: &Cylinder, m: usize, size: usize, level: i64) -> Result<Vec<Site>, HarnessError> {
    let side = cyl.side();
    if m > cyl.dim() {
        return Err(HarnessError::Config(format!("plane dimension {m} exceeds d = {}", cyl.dim())));
    }
    let z = (level * i64::from(side)) as i32;
    let centre = (0..m).fold(0, |c, a| cyl.with_coord(c, a, side / 2));
    let mut offsets = vec![(0i64, 0i64)];
    if m == 1 {
        offsets.extend((1..size as i64).map(|k| (k, 0)));
    } else {
        let dirs = [(1, 0), (0, 1), (-1, 0), (0, -1)];
        let (mut x, mut y) = (0i64, 0i64);
        let mut leg = 0;
        while offsets.len() < size {
            let (dx, dy) = dirs[leg % 4];
            for _ in 0..(leg / 2 + 1) {
                x += dx;
                y += dy;
                offsets.push((x, y));
            }
            leg += 1;
        }
    }
    offsets.truncate(size);
    let sites: Vec<Site> = offsets
        .iter()
        .map(|&(x, y)| {
            let c = cyl.shift_cell(centre, 0, x);
            let cell = if m == 2 { cyl.shift_cell(c, 1, y) } else { c };
            Site { cell, z }
        })
        .collect();
    let mut distinct = sites.clone();
    distinct.sort();
    distinct.dedup();
    if distinct.len() != sites.len() {
        return Err(HarnessError::Config(format!("torus side {side} too small for a shape of {size} sites")));
    }
    Ok(sites)
}

/// `P[X_{[0, D^j_{[uN^{d−1}]}]} ⊇ A]` for nested planar sets of growing size.
pub fn run_exponential_bound(cfg: &ExperimentConfig) -> Result<ResultRecord, HarnessError> {
    let p = &cfg.expbound;
    let d = cfg.d;
    let mut rec = ResultRecord::new(cfg);
    let mut table = Table::new("sizes", &["N", "size", "runs", "P", "ci_lo", "ci_hi", "log_P"]);
    let mut monotone = true;
    let mut censored_total = 0;
    for &n in &cfg.sides {
        let cyl = Cylinder::new(d, n)?;
        let shape = planar_shape(&cyl, p.m, p.max_size, p.level)?;
        let z = shape[0].z;
        let idx = (p.u * pow(n, d - 1)).floor() as usize;
        let wc = walk_config(cfg, n);
        let covered: Vec<Option<usize>> = (0..cfg.replicas)
            .into_par_iter()
            .map(|r| {
                let opts = StoreOptions {
                    window: Some((z, z)),
                    ..StoreOptions::default()
                };
                let (mut store, mut rng) = wc.open(stream(n, r), opts)?;
                let mut tracker = ExcursionTracker::new(p.level, n, Some(idx));
                tracker.observe(0, i64::from(store.position().z));
                while tracker.ledger().departures.len() < idx {
                    let Ok(s) = advance_skipping(&mut store, &mut rng, p.level, n) else {
                        return Ok(None);
                    };
                    tracker.observe(store.time(), i64::from(s.z));
                }
                let visited = store.visited();
                Ok(Some(shape.iter().take_while(|&&s| visited.first_hit(s).is_some()).count()))
            })
            .collect::<Result<_, HarnessError>>()?;
        let done: Vec<usize> = covered.iter().flatten().copied().collect();
        censored_total += cfg.replicas - done.len() as u64;
        let runs = done.len() as u64;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut prev = 1.0;
        for size in 1..=p.max_size {
            let hits = done.iter().filter(|&&c| c >= size).count() as u64;
            let pr = hits as f64 / runs.max(1) as f64;
            monotone &= pr <= prev;
            prev = pr;
            let (lo, hi) = wilson(hits, runs, Z95);
            let log_p = (hits > 0).then(|| pr.ln());
            if let Some(l) = log_p {
                xs.push(size as f64);
                ys.push(l);
            }
            table.push(vec![n.into(), size.into(), runs.into(), pr.into(), lo.into(), hi.into(), log_p.into()]);
        }
        if let Some(fit) = ols(&xs, &ys) {
            rec.summary.insert(format!("decay_rate_N{n}"), (-fit.slope).into());
            rec.summary.insert(format!("decay_r_squared_N{n}"), fit.r_squared.into());
        }
    }
    rec.summary.insert("reference_lambda".into(), p.lambda.into());
    rec.checks.push(Check::new("monotone_in_size", monotone, "A ⊆ A′ ⇒ P[⊇A′] ≤ P[⊇A]"));
    rec.set_counts(cfg.replicas * cfg.sides.len() as u64, censored_total);
    rec.tables = vec![table];
    Ok(rec)
}

/// Level local times `L_N(·, k)` of the cylinder walk from the origin against
/// local times `L(·, k)` of simple random walk on `Z`.
pub fn run_localtime_identity(cfg: &ExperimentConfig) -> Result<ResultRecord, HarnessError> {
    let mut rec = ResultRecord::new(cfg);
    let mut table = Table::new(
        "identity",
        &[
            "N", "k", "runs", "censored", "mean_L_N0", "mean_L0", "ks_stat", "ks_p", "chi2_stat", "chi2_p", "sup_ks_stat", "sup_ks_p",
        ],
    );
    let mut mass_ok = true;
    let mut censored_total = 0;
    // the identity concerns the walk started on a level, so the origin is used
    let origin = ExperimentConfig {
        start: crate::walk::Start::Origin,
        ..cfg.clone()
    };
    for &n in &cfg.sides {
        let wc = walk_config(&origin, n);
        for &k in &cfg.localtime.ks {
            let need = k as usize + 1;
            let cyl: Vec<Option<(u64, u64, bool)>> = (0..cfg.replicas)
                .into_par_iter()
                .map(|r| {
                    let mut walk = wc.open_height(stream(n, r) ^ (k << 48))?;
                    let mut taus = TauTracker::levels_only(n);
                    taus.observe(0, walk.z());
                    while taus.count() < need {
                        if walk.time() >= cfg.budget {
                            return Ok(None);
                        }
                        let z = walk.step();
                        taus.observe(walk.time(), z);
                    }
                    let lt = level_local_time_from_skeleton(taus.skeleton(), k as f64)
                        .at()
                        .expect("enough levels");
                    Ok(Some((lt.at(0), lt.max(), lt.total() == k + 1)))
                })
                .collect::<Result<_, HarnessError>>()?;
            let srw: Vec<(u64, u64)> = (0..cfg.replicas)
                .into_par_iter()
                .map(|r| {
                    // streams disjoint from the cylinder replicas
                    let mut rng = StepRng::new(cfg.seed, (1 << 63) | stream(n, r) ^ (k << 48), 2);
                    let path = walk_z(&mut rng, k);
                    let lt = srw_local_time(&path, k as usize);
                    (lt.get(&0).copied().unwrap_or(0), lt.values().copied().max().unwrap_or(0))
                })
                .collect();
            let done: Vec<(u64, u64, bool)> = cyl.iter().flatten().copied().collect();
            mass_ok &= done.iter().all(|c| c.2);
            let censored = cfg.replicas - done.len() as u64;
            censored_total += censored;
            let a0: Vec<f64> = done.iter().map(|c| c.0 as f64).collect();
            let b0: Vec<f64> = srw.iter().map(|s| s.0 as f64).collect();
            let a_sup: Vec<f64> = done.iter().map(|c| c.1 as f64).collect();
            let b_sup: Vec<f64> = srw.iter().map(|s| s.1 as f64).collect();
            let ks = ks_two_sample(&a0, &b0);
            let chi = chi_square_two_sample(
                &done.iter().map(|c| c.0).collect::<Vec<_>>(),
                &srw.iter().map(|s| s.0).collect::<Vec<_>>(),
                20,
            );
            let ks_sup = ks_two_sample(&a_sup, &b_sup);
            table.push(vec![
                n.into(),
                k.into(),
                (done.len() as u64).into(),
                censored.into(),
                crate::stats::mean(&a0).into(),
                crate::stats::mean(&b0).into(),
                ks.statistic.into(),
                ks.p_value.into(),
                chi.statistic.into(),
                chi.p_value.into(),
                ks_sup.statistic.into(),
                ks_sup.p_value.into(),
            ]);
        }
    }
    let min_p = table.floats("ks_p").into_iter().fold(1.0, f64::min);
    rec.summary.insert("min_ks_p".into(), min_p.into());
    rec.checks.push(Check::new("local_time_mass", mass_ok, "Σ_ℓ L_N(ℓ, k) = k + 1 on every replica"));
    rec.set_counts(cfg.replicas * cfg.sides.len() as u64 * cfg.localtime.ks.len() as u64, censored_total);
    rec.tables = vec![table];
    Ok(rec)
}

pub fn run_qtable(cfg: &ExperimentConfig) -> Result<ResultRecord, HarnessError> {
    let p = &cfg.qtable;
    let mut rec = ResultRecord::new(cfg);
    let mut table = Table::new("qtable", &["nu", "q", "abs_error", "method"]);
    let mut quad = Vec::new();
    for &nu in &p.nus {
        let q = q_quadrature(nu, p.tol)?;
        table.push(vec![nu.into(), q.value.into(), q.abs_error.into(), q.method.to_string().into()]);
        quad.push(q);
    }
    let mut decreasing = true;
    for w in quad.windows(2) {
        if w[0].nu >= 3 && w[1].nu > w[0].nu {
            decreasing &= w[1].value < w[0].value;
        }
    }
    if let Some(h) = p.mc_horizon {
        let plan = StagedPlan::standard(p.mc_replicas, h);
        for &nu in p.nus.iter().filter(|&&nu| nu >= 3) {
            let est = q_monte_carlo_staged(nu, &plan, cfg.seed)?;
            table.push(vec![
                nu.into(),
                est.estimate.value.into(),
                est.estimate.abs_error.into(),
                est.estimate.method.to_string().into(),
            ]);
            rec.summary.insert(format!("truncation_bias_nu{nu}"), truncation_bias_bound(nu, h).into());
        }
    }
    rec.checks.push(Check::new("decreasing_in_nu", decreasing, "q(ν) strictly decreasing for ν ≥ 3"));
    rec.tables = vec![table];
    Ok(rec)
}

pub fn run_thresholds(cfg: &ExperimentConfig) -> Result<ResultRecord, HarnessError> {
    let p = &cfg.thresholds;
    let mut rec = ResultRecord::new(cfg);
    let scan = threshold_scan(p.d_min, p.d_max, p.tol)?;
    let mut table = Table::new("thresholds", &["d", "q(d-1)", "rho", "rho_err", "holds", "lambda0", "c0"]);
    for r in &scan.reports {
        table.push(vec![
            r.d.into(),
            r.q_used.value.into(),
            r.rho.into(),
            r.rho_err.into(),
            r.holds.into(),
            r.lambda0.into(),
            r.c0.into(),
        ]);
    }
    let monotone = scan.reports.windows(2).all(|w| w[1].rho < w[0].rho && (!w[0].holds || w[1].holds));
    let propagated = scan.reports.iter().all(|r| r.rho_err <= 7.0 * r.q_used.abs_error);
    rec.summary.insert("minimal_holding_d".into(), scan.minimal_holding.into());
    rec.checks.push(Check::new("holds_monotone", monotone, "ρ decreasing and the condition monotone in d"));
    rec.checks.push(Check::new("error_propagation", propagated, "ρ error ≤ 7 · q error"));
    // keep the plain-CSV writer in use so both paths agree on columns
    debug_assert!({
        let mut buf = Vec::new();
        write_thresholds(&scan.reports, &mut buf).is_ok()
    });
    rec.tables = vec![table];
    Ok(rec)
}

pub fn run_peierls(cfg: &ExperimentConfig) -> Result<ResultRecord, HarnessError> {
    let mut rec = ResultRecord::new(cfg);
    let mut table = Table::new("peierls", &["n", "a_n", "bound", "ratio_to_bound", "growth"]);
    let mut bound_ok = true;
    let mut prev: Option<u64> = None;
    for n in 1..=cfg.peierls.n_max {
        let a = star_saw_count(n)?;
        let b = peierls_bound(n);
        bound_ok &= a <= b;
        table.push(vec![
            n.into(),
            a.into(),
            b.into(),
            (a as f64 / b as f64).into(),
            prev.map(|p| a as f64 / p as f64).into(),
        ]);
        prev = Some(a);
    }
    rec.checks.push(Check::new("peierls_bound", bound_ok, "a(n) ≤ 8·7^{n−1}"));
    rec.tables = vec![table];
    Ok(rec)
}
