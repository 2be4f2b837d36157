//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero on any failure.
//!
//! Run alone with `cargo test -p dcop-core --test acceptance`; a positional argument
//! restricts the run to criteria whose name contains it.

use std::collections::VecDeque;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use dcop_core::benchmarks::{generate, GeneratorParams, MeetingParams, RandomParams, WgcParams};
use dcop_core::engine::{run, run_observed, AgentFactory, RoundView, RunOptions};
use dcop_core::experiment::{run_experiment, ExperimentConfig, ExperimentResult, HarnessOptions};
use dcop_core::gls::{eff_cost, potential, CostModifier, DglsConfig, GdbaConfig, Manner, Scope, ViolationRule};
use dcop_core::local_search::{DsaConfig, Mgm2Config, MgmConfig};
use dcop_core::maxsum::{DampDirection, MaxsumConfig};
use dcop_core::{AlgorithmConfig, Problem, ProblemParts, RawEdge};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCOPES: [Scope; 4] = [Scope::Cell, Scope::Table, Scope::Row, Scope::Column];
const MANNERS: [Manner; 2] = [Manner::Additive, Manner::Multiplicative];

struct Line {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn line(name: &'static str, pass: bool, detail: String) -> Line {
    Line { name, pass, detail }
}

type Criterion = fn() -> Vec<Line>;

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let groups: [(&str, Criterion); 11] = [
        ("modifier_bound+modifier_symmetry", modifier_bound_and_symmetry),
        ("potential_game", potential_game),
        ("cell_scope_equivalence", cell_scope_equivalence),
        ("mgm_equivalence", mgm_equivalence),
        ("message_bound", message_bound),
        ("penalty_dynamics", penalty_dynamics),
        ("dominance_random", dominance_random),
        ("dominance_wgc", dominance_wgc),
        ("maxsum_tree_oracle", maxsum_oracle),
        ("mgm_monotonicity", mgm_monotonicity),
        ("determinism", determinism),
    ];
    let mut passed = 0;
    let mut total = 0;
    for (group, check) in groups {
        if !filter.is_empty() && !filter.iter().any(|f| group.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let lines = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| vec![line("panicked", false, format!("{group} aborted with a panic"))]);
        let secs = start.elapsed().as_secs_f64();
        for l in lines {
            total += 1;
            passed += usize::from(l.pass);
            println!("{} {}: {} [{secs:.1}s]", if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail);
        }
    }
    println!("acceptance: {passed}/{total} criteria passed");
    if passed != total {
        std::process::exit(1);
    }
}

fn random_problem(n: usize, density: f64, domain_size: usize, cost_hi: u32, seed: u64) -> Problem {
    let params = RandomParams { n, density, domain_size, cost_lo: 0, cost_hi, exact_edges: false };
    generate(&GeneratorParams::Random(params), seed).expect("generator")
}

/// Every edge's two modifier copies are exact transposes.
fn symmetric(problem: &Problem, view: &RoundView<'_, f64>) -> bool {
    problem.edges().iter().all(|e| {
        let ki = problem.incidence_index(e.i, e.j).unwrap();
        let kj = problem.incidence_index(e.j, e.i).unwrap();
        view.modifiers(e.i).unwrap()[ki].is_transpose_of(&view.modifiers(e.j).unwrap()[kj])
    })
}

fn max_and_min_entry(view: &RoundView<'_, f64>) -> (f64, f64) {
    let mut hi = 0.0f64;
    let mut lo = 0.0f64;
    for a in 0..view.n_agents() {
        for m in view.modifiers(a).unwrap() {
            for &v in m.entries() {
                hi = hi.max(v);
                lo = lo.min(v);
            }
        }
    }
    (hi, lo)
}

fn modifier_bound_and_symmetry() -> Vec<Line> {
    let mut bound_ok = true;
    let mut symmetric_ok = true;
    let mut nonnegative = true;
    let mut worst = Vec::new();
    let mut runs = 0;
    for gamma in [0.5, 0.9] {
        let limit = 1.0 / (1.0 - gamma) + 1e-9;
        let mut max_seen = 0.0f64;
        for scope in SCOPES {
            for r in 0..50u64 {
                let problem = random_problem(30, 0.1, 5, 100, r);
                let algo = DglsConfig::new(MANNERS[r as usize % 2], gamma, scope);
                run_observed(&problem, &algo, &RunOptions::new(500, 1000 + r), |view| {
                    let (hi, lo) = max_and_min_entry(view);
                    max_seen = max_seen.max(hi);
                    bound_ok &= hi <= limit;
                    nonnegative &= lo >= 0.0;
                    symmetric_ok &= symmetric(&problem, view);
                })
                .expect("run");
                runs += 1;
            }
        }
        worst.push(format!("gamma={gamma}: max entry {max_seen:.6} <= {:.6}", 1.0 / (1.0 - gamma)));
    }
    vec![
        line("modifier_bound", bound_ok && nonnegative, format!("{runs} runs x 500 rounds; {}; nonnegative={nonnegative}", worst.join(", "))),
        line(
            "modifier_symmetry",
            symmetric_ok,
            format!("{runs} runs, all four scopes, both manners: endpoint copies bit-exact transposes at every round start"),
        ),
    ]
}

/// Local effective cost of `agent` at `value`, using its own modifiers.
fn local_effective(problem: &Problem, mods: &[CostModifier<f64>], agent: usize, value: usize, values: &[usize], manner: Manner) -> f64 {
    problem
        .neighbors(agent)
        .iter()
        .enumerate()
        .map(|(k, inc)| {
            let d_other = values[inc.neighbor];
            eff_cost(problem.table(inc).oriented(inc.self_is_row, value, d_other), mods[k].get(value, d_other), manner)
        })
        .sum()
}

fn potential_game() -> Vec<Line> {
    let mut lines = Vec::new();
    for manner in MANNERS {
        let mut probes = 0;
        let mut worst = 0.0f64;
        let mut penalized = 0;
        for r in 0..10u64 {
            let problem = random_problem(30, 0.15, 5, 100, 200 + r);
            let algo = DglsConfig::new(manner, 0.9, SCOPES[r as usize % 4]);
            let mut probe_rng = ChaCha8Rng::seed_from_u64(r);
            run_observed(&problem, &algo, &RunOptions::new(300, r), |view| {
                if view.round == 0 || view.round % 3 != 0 {
                    return;
                }
                let mods: Vec<&[CostModifier<f64>]> = (0..view.n_agents()).map(|a| view.modifiers(a).unwrap()).collect();
                if mods.iter().any(|m| m.iter().any(|x| x.max_entry() > 0.0)) {
                    penalized += 1;
                }
                let values = view.values.to_vec();
                let agent = probe_rng.gen_range(0..problem.n_agents());
                let size = problem.domain(agent).size();
                let new_value = (values[agent] + probe_rng.gen_range(1..size)) % size;
                let mut moved = values.clone();
                moved[agent] = new_value;
                let delta_i = local_effective(&problem, mods[agent], agent, values[agent], &values, manner)
                    - local_effective(&problem, mods[agent], agent, new_value, &values, manner);
                let delta_phi = potential(&problem, &values, &mods, manner) - potential(&problem, &moved, &mods, manner);
                worst = worst.max((delta_i - delta_phi).abs());
                probes += 1;
            })
            .expect("run");
        }
        lines.push(line(
            "potential_game",
            probes == 1000 && worst <= 1e-9,
            format!("manner {manner}: {probes} probes over 10 runs, max |delta_i - delta_phi| = {worst:.3e}, {penalized} probes with nonzero penalties"),
        ));
    }
    lines
}

fn assignment_trace(problem: &Problem, algo: &dyn AgentFactory<f64>, seed: u64, rounds: usize) -> (Vec<Vec<usize>>, f64) {
    let trace = run(problem, algo, &RunOptions::new(rounds, seed).assignments(true).penalties(true)).expect("run");
    let max_mean = trace.rounds.iter().filter_map(|r| r.penalty).map(|p| p.mean).fold(0.0, f64::max);
    (trace.assignments().unwrap().into_iter().map(<[usize]>::to_vec).collect(), max_mean)
}

fn cell_scope_equivalence() -> Vec<Line> {
    let mut identical = 0;
    let mut with_penalties = 0;
    let mut total = 0;
    for gamma in [0.3, 0.9] {
        for k in 0..20u64 {
            let problem = random_problem(15, 0.3, 4, 1, 300 + k);
            let (a, pa) = assignment_trace(&problem, &DglsConfig::new(Manner::Additive, gamma, Scope::Cell), k, 300);
            let (m, _) = assignment_trace(&problem, &DglsConfig::new(Manner::Multiplicative, gamma, Scope::Cell), k, 300);
            total += 1;
            identical += usize::from(a == m);
            with_penalties += usize::from(pa > 0.0);
        }
    }
    vec![line(
        "cell_scope_equivalence",
        identical == total,
        format!("{identical}/{total} (instance, gamma) pairs give identical 300-round assignment traces; penalties raised in {with_penalties}"),
    )]
}

fn mgm_equivalence() -> Vec<Line> {
    let mut identical = 0;
    let mut with_penalties = 0;
    let mut total = 0;
    for gamma in [0.3, 0.9] {
        for k in 0..20u64 {
            let problem = random_problem(15, 0.3, 4, 100, 400 + k);
            let (d, pd) = assignment_trace(&problem, &DglsConfig::new(Manner::Additive, gamma, Scope::Table), k, 300);
            let (m, _) = assignment_trace(&problem, &MgmConfig {}, k, 300);
            total += 1;
            identical += usize::from(d == m);
            with_penalties += usize::from(pd > 0.0);
        }
    }
    vec![line(
        "mgm_equivalence",
        identical == total,
        format!("{identical}/{total} (instance, gamma) pairs match MGM for 300 rounds; penalties raised in {with_penalties}"),
    )]
}

/// Largest per-agent, per-round message count divided by the agent's degree.
fn worst_message_ratio(problem: &Problem, algo: &dyn AgentFactory<f64>, seed: u64) -> f64 {
    let trace = run(problem, algo, &RunOptions::new(200, seed).messages(true)).expect("run");
    let mut worst = 0.0f64;
    for counts in trace.message_audit().unwrap() {
        for (a, &c) in counts.iter().enumerate() {
            worst = worst.max(c as f64 / problem.degree(a) as f64);
        }
    }
    worst
}

fn message_bound() -> Vec<Line> {
    let (mut dgls, mut gdba, mut dsa) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..10u64 {
        let problem = random_problem(30, 0.15, 5, 100, 500 + k);
        for scope in SCOPES {
            for manner in MANNERS {
                dgls = dgls.max(worst_message_ratio(&problem, &DglsConfig::new(manner, 0.9, scope), k));
            }
        }
        gdba = gdba.max(worst_message_ratio(&problem, &GdbaConfig::new(Manner::Multiplicative, ViolationRule::NonMinimum, Scope::Table), k));
        dsa = dsa.max(worst_message_ratio(&problem, &DsaConfig::new(0.8), k));
    }
    vec![line(
        "message_bound",
        dgls <= 3.0 && gdba <= 2.0 && dsa <= 1.0,
        format!("max messages per neighbor per round: DGLS {dgls:.3} (<= 3), GDBA {gdba:.3} (<= 2), DSA {dsa:.3} (<= 1)"),
    )]
}

fn gdba_mnmt() -> AlgorithmConfig {
    AlgorithmConfig::Gdba(GdbaConfig::new(Manner::Multiplicative, ViolationRule::NonMinimum, Scope::Table))
}

fn experiment(benchmark: GeneratorParams, instances: usize, repeats: usize, rounds: usize, algorithms: Vec<AlgorithmConfig>, diagnose: bool) -> ExperimentResult {
    let config = ExperimentConfig { benchmark, instances, repeats_per_instance: repeats, rounds, algorithms, master_seed: 2024, output: None };
    run_experiment(&config, HarnessOptions { threads: None, diagnose }).expect("experiment")
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn penalty_dynamics() -> Vec<Line> {
    let random = GeneratorParams::Random(RandomParams { n: 50, density: 0.1, domain_size: 10, ..Default::default() });
    let result = experiment(random, 10, 1, 1000, vec![gdba_mnmt()], true);
    let rows = &result.aggregate()[0].1;
    let means: Vec<f64> = rows.iter().map(|r| r.penalty.unwrap().mean).collect();
    let rounds: Vec<f64> = rows.iter().map(|r| r.round as f64).collect();
    let nondecreasing = means.windows(2).all(|w| w[1] >= w[0]);
    let r = pearson(&rounds, &means);
    let random_final = *means.last().unwrap();

    let meetings = GeneratorParams::MeetingScheduling(MeetingParams { slots: 10, meetings: 10, persons: 30, ..Default::default() });
    let result = experiment(meetings, 10, 1, 1000, vec![gdba_mnmt()], true);
    let meeting_final = result.aggregate()[0].1.last().unwrap().penalty.unwrap().mean;
    let ratio = meeting_final / random_final;
    vec![
        line(
            "penalty_growth_random",
            nondecreasing && r >= 0.99,
            format!("GDBA(M,NM,T), 10 runs x 1000 rounds: mean penalty nondecreasing={nondecreasing}, pearson r={r:.5}, final mean {random_final:.3}"),
        ),
        line(
            "penalty_meeting_vs_random",
            ratio <= 0.25,
            format!("final mean penalty: meeting scheduling {meeting_final:.4} vs random {random_final:.3} (ratio {ratio:.4} <= 0.25)"),
        ),
    ]
}

fn final_means(result: &ExperimentResult) -> Vec<(String, f64)> {
    result.aggregate().into_iter().map(|(a, rows)| (a.label(), rows.last().unwrap().mean_best_so_far)).collect()
}

fn dominance_lines(name_prefix: [&'static str; 2], result: &ExperimentResult, margin: f64) -> Vec<Line> {
    let finals = final_means(result);
    let (dgls_label, dgls) = finals[0].clone();
    finals[1..]
        .iter()
        .zip(name_prefix)
        .map(|((label, other), name)| {
            let rel = (other - dgls) / other;
            line(name, rel >= margin, format!("{dgls_label} {dgls:.2} vs {label} {other:.2}: relative margin {:.2}% (needs >= {:.0}%)", rel * 100.0, margin * 100.0))
        })
        .collect()
}

fn dominance_random() -> Vec<Line> {
    let benchmark = GeneratorParams::Random(RandomParams { n: 70, density: 0.1, domain_size: 10, ..Default::default() });
    let algorithms = vec![
        AlgorithmConfig::Dgls(DglsConfig::new(Manner::Multiplicative, 0.5, Scope::Column)),
        AlgorithmConfig::Dsa(DsaConfig::new(0.8)),
        gdba_mnmt(),
    ];
    let result = experiment(benchmark, 10, 5, 1000, algorithms, false);
    dominance_lines(["dominance_random_vs_dsa", "dominance_random_vs_gdba"], &result, 0.01)
}

fn dominance_wgc() -> Vec<Line> {
    let benchmark = GeneratorParams::WeightedGraphColoring(WgcParams { n: 60, colors: 3, density: 0.05, ..Default::default() });
    let algorithms = vec![
        AlgorithmConfig::Dgls(DglsConfig::new(Manner::Multiplicative, 0.9, Scope::Column)),
        gdba_mnmt(),
        AlgorithmConfig::Dms(MaxsumConfig::new(0.9)),
    ];
    let result = experiment(benchmark, 10, 5, 1000, algorithms, false);
    dominance_lines(["dominance_wgc_vs_gdba", "dominance_wgc_vs_dms"], &result, 0.20)
}

fn random_tree(rng: &mut ChaCha8Rng) -> Problem {
    let n = rng.gen_range(2..=10);
    let domains: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
    let edges = (1..n)
        .map(|j| {
            let i = rng.gen_range(0..j);
            let costs = (0..domains[i] * domains[j]).map(|_| rng.gen_range(0.0..100.0)).collect();
            RawEdge { i, j, costs }
        })
        .collect();
    Problem::new(ProblemParts { domains, edges }).expect("tree")
}

fn eccentricity(problem: &Problem, from: usize) -> (usize, usize) {
    let mut dist = vec![usize::MAX; problem.n_agents()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    let mut far = (from, 0);
    while let Some(v) = queue.pop_front() {
        if dist[v] > far.1 {
            far = (v, dist[v]);
        }
        for inc in problem.neighbors(v) {
            if dist[inc.neighbor] == usize::MAX {
                dist[inc.neighbor] = dist[v] + 1;
                queue.push_back(inc.neighbor);
            }
        }
    }
    far
}

fn brute_force(problem: &Problem) -> f64 {
    let sizes: Vec<usize> = problem.domains().iter().map(|d| d.size()).collect();
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut code| {
            let values: Vec<usize> = sizes
                .iter()
                .map(|&s| {
                    let v = code % s;
                    code /= s;
                    v
                })
                .collect();
            problem.total_cost(&values).unwrap()
        })
        .fold(f64::INFINITY, f64::min)
}

fn maxsum_oracle() -> Vec<Line> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let algo = MaxsumConfig { lambda: 0.0, damp_direction: DampDirection::Both, noise: 0.0 };
    let mut exact = 0;
    let mut max_diameter = 0;
    for k in 0..25u64 {
        let problem = random_tree(&mut rng);
        let (end, _) = eccentricity(&problem, 0);
        let (_, diameter) = eccentricity(&problem, end);
        max_diameter = max_diameter.max(diameter);
        let trace = run(&problem, &algo, &RunOptions::new(diameter + 1, k)).expect("run");
        exact += usize::from(trace.rounds.last().unwrap().current_cost == brute_force(&problem));
    }
    vec![line(
        "maxsum_tree_oracle",
        exact == 25,
        format!("{exact}/25 random trees (real costs, up to 10 variables, diameter up to {max_diameter}) solved exactly after diameter+1 rounds"),
    )]
}

fn nonincreasing_runs(algo: &dyn AgentFactory<f64>) -> usize {
    (0..20u64)
        .filter(|&k| {
            let problem = random_problem(30, 0.15, 5, 100, 600 + k);
            let trace = run(&problem, algo, &RunOptions::new(200, k)).expect("run");
            let costs: Vec<f64> = trace.all_records().map(|r| r.current_cost).collect();
            costs.windows(2).all(|w| w[1] <= w[0])
        })
        .count()
}

fn mgm_monotonicity() -> Vec<Line> {
    let mgm = nonincreasing_runs(&MgmConfig {});
    let mgm2 = nonincreasing_runs(&Mgm2Config::default());
    let trap = Problem::new(ProblemParts { domains: vec![2, 2], edges: vec![RawEdge { i: 0, j: 1, costs: vec![0.0, 9.0, 9.0, 1.0] }] }).unwrap();
    let escapes = |algo: &dyn AgentFactory<f64>| {
        (0..20u64).filter(|&s| run(&trap, algo, &RunOptions::new(50, s).initial(vec![1, 1])).unwrap().final_best() == 0.0).count()
    };
    let (mgm_escapes, mgm2_escapes) = (escapes(&MgmConfig {}), escapes(&Mgm2Config::default()));
    vec![
        line("mgm_monotone", mgm == 20, format!("{mgm}/20 MGM runs with nonincreasing cost over 200 rounds")),
        line("mgm2_monotone", mgm2 == 20, format!("{mgm2}/20 MGM2 runs with nonincreasing cost over 200 rounds")),
        line(
            "mgm2_joint_escape",
            mgm_escapes == 0 && mgm2_escapes == 20,
            format!("trap [[0,9],[9,1]] from (1,1) within 50 rounds: MGM escapes in {mgm_escapes}/20 seeds, MGM2 in {mgm2_escapes}/20"),
        ),
    ]
}

fn determinism() -> Vec<Line> {
    let all: Vec<AlgorithmConfig> = [
        r#"{"algo":"dsa","p":0.8}"#,
        r#"{"algo":"mgm"}"#,
        r#"{"algo":"mgm2"}"#,
        r#"{"algo":"dgls","manner":"M","gamma":0.5,"scope":"col"}"#,
        r#"{"algo":"gdba","manner":"M","violation":"NM","scope":"tab"}"#,
        r#"{"algo":"dms","lambda":0.9}"#,
    ]
    .iter()
    .map(|t| serde_json::from_str(t).unwrap())
    .collect();
    let config = ExperimentConfig {
        benchmark: GeneratorParams::Random(RandomParams { n: 30, density: 0.2, domain_size: 5, ..Default::default() }),
        instances: 4,
        repeats_per_instance: 3,
        rounds: 150,
        algorithms: all,
        master_seed: 99,
        output: None,
    };
    let csv = |threads: usize, diagnose: bool| {
        let mut c = config.clone();
        if diagnose {
            c.algorithms.retain(|a| a.has_penalties());
        }
        let result = run_experiment(&c, HarnessOptions { threads: Some(threads), diagnose }).expect("experiment");
        let mut per_run = Vec::new();
        result.write_per_run_csv(&mut per_run).unwrap();
        (result.aggregate_csv(), per_run)
    };
    let mut same = true;
    for diagnose in [false, true] {
        let reference = csv(1, diagnose);
        same &= csv(1, diagnose) == reference && csv(8, diagnose) == reference && csv(8, diagnose) == reference;
    }
    vec![line("determinism", same, "aggregated and per-run CSVs byte-identical across reruns at 1 and 8 threads, with and without diagnostics".to_string())]
}
