//! Optimizer roster behind one uniform `run` interface: classic DE,
//! success-history adaptive DE with linear/nonlinear population shrink,
//! rank-selection and success-rate variants, dual-phase knowledge
//! sharing, and a Q-learning operator ensemble.

use crate::error::{Error, Result};
use crate::linalg::OrthogonalMatrix;
use crate::objective::Objective;
use crate::rng::{rng_from_seed, RunRng};
use crate::sha::{
    binomial_crossover, eigen_basis, eigen_crossover, lehmer_update, mutate_current_to_pbest,
    mutate_rand1, pbest_combine, repair_midpoint, rsp_index, sample_cr, sample_f,
    sample_params, srtde_mf, srtde_pb, success_rate, Individual, Population,
    PopulationSchedule, ScheduleKind, ShaMemory, SuccessSet,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Algorithm tags accepted by `run` and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    ClassicDe,
    Lshade,
    NlshadeRsp,
    Lsrtde,
    Agsk,
    Qensemble,
}

impl Algorithm {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "classic_de" | "de" => Ok(Algorithm::ClassicDe),
            "lshade" => Ok(Algorithm::Lshade),
            "nlshade_rsp" => Ok(Algorithm::NlshadeRsp),
            "lsrtde" => Ok(Algorithm::Lsrtde),
            "agsk" => Ok(Algorithm::Agsk),
            "qensemble" => Ok(Algorithm::Qensemble),
            other => Err(Error::invalid_argument(format!(
                "unknown optimizer '{other}'"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::ClassicDe => "classic_de",
            Algorithm::Lshade => "lshade",
            Algorithm::NlshadeRsp => "nlshade_rsp",
            Algorithm::Lsrtde => "lsrtde",
            Algorithm::Agsk => "agsk",
            Algorithm::Qensemble => "qensemble",
        }
    }

    pub fn all() -> [Algorithm; 6] {
        [
            Algorithm::ClassicDe,
            Algorithm::Lshade,
            Algorithm::NlshadeRsp,
            Algorithm::Lsrtde,
            Algorithm::Agsk,
            Algorithm::Qensemble,
        ]
    }
}

/// Knobs for every optimizer; unset population sizes resolve per
/// algorithm at run time (5*D for classic DE, 18*D otherwise).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub n_init: Option<usize>,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_memory_size")]
    pub memory_size: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_p_fraction")]
    pub p_fraction: f64,
    #[serde(default = "default_memory_seed")]
    pub init_f: f64,
    #[serde(default = "default_memory_seed")]
    pub init_cr: f64,
    #[serde(default)]
    pub use_eigen: bool,
    #[serde(default)]
    pub schedule: Option<ScheduleKind>,
    #[serde(default = "default_classic_f")]
    pub classic_f: f64,
    #[serde(default = "default_classic_cr")]
    pub classic_cr: f64,
    #[serde(default = "default_agsk_kf")]
    pub agsk_kf: f64,
    #[serde(default = "default_agsk_kr")]
    pub agsk_kr: f64,
    #[serde(default = "default_q_alpha")]
    pub q_alpha: f64,
    #[serde(default = "default_q_gamma")]
    pub q_gamma: f64,
    #[serde(default = "default_q_epsilon")]
    pub q_epsilon: f64,
}

fn default_n_min() -> usize {
    4
}
fn default_memory_size() -> usize {
    6
}
fn default_learning_rate() -> f64 {
    0.8
}
fn default_p_fraction() -> f64 {
    0.11
}
fn default_memory_seed() -> f64 {
    0.5
}
fn default_classic_f() -> f64 {
    0.5
}
fn default_classic_cr() -> f64 {
    0.9
}
fn default_agsk_kf() -> f64 {
    0.5
}
fn default_agsk_kr() -> f64 {
    0.9
}
fn default_q_alpha() -> f64 {
    0.1
}
fn default_q_gamma() -> f64 {
    0.9
}
fn default_q_epsilon() -> f64 {
    0.1
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        OptimizerConfig {
            algorithm,
            n_init: None,
            n_min: default_n_min(),
            memory_size: default_memory_size(),
            learning_rate: default_learning_rate(),
            p_fraction: default_p_fraction(),
            init_f: default_memory_seed(),
            init_cr: default_memory_seed(),
            use_eigen: false,
            schedule: None,
            classic_f: default_classic_f(),
            classic_cr: default_classic_cr(),
            agsk_kf: default_agsk_kf(),
            agsk_kr: default_agsk_kr(),
            q_alpha: default_q_alpha(),
            q_gamma: default_q_gamma(),
            q_epsilon: default_q_epsilon(),
        }
    }

    /// Initial population size for an objective of this dimension.
    pub fn resolved_n_init(&self, dimension: usize) -> usize {
        self.n_init.unwrap_or(match self.algorithm {
            Algorithm::ClassicDe => 5 * dimension.max(1),
            _ => 18 * dimension.max(1),
        })
        .max(self.n_min)
    }

    fn resolved_schedule(&self) -> ScheduleKind {
        self.schedule.unwrap_or(match self.algorithm {
            Algorithm::NlshadeRsp | Algorithm::Lsrtde => ScheduleKind::Nonlinear,
            _ => ScheduleKind::Linear,
        })
    }
}

/// Everything one optimizer run produces.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub seed: u64,
    /// (nfe checkpoint, best fitness observed so far); non-increasing.
    pub trace: Vec<(u64, f64)>,
    pub final_best: Individual,
    pub wall_time: f64,
}

/// State-action value table for the operator-selection ensemble.
#[derive(Debug, Clone)]
pub struct QTable {
    values: Vec<f64>,
    n_states: usize,
    n_actions: usize,
}

impl QTable {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        QTable {
            values: vec![0.0; n_states * n_actions],
            n_states,
            n_actions,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.n_actions + action]
    }

    fn max_over_actions(&self, state: usize) -> f64 {
        let row = &self.values[state * self.n_actions..(state + 1) * self.n_actions];
        row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One-step temporal-difference update:
/// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
pub fn q_update(
    q: &mut QTable,
    state: usize,
    action: usize,
    reward: f64,
    next_state: usize,
    alpha: f64,
    gamma: f64,
) {
    let best_next = q.max_over_actions(next_state);
    let idx = state * q.n_actions + action;
    let current = q.values[idx];
    q.values[idx] = current + alpha * (reward + gamma * best_next - current);
}

/// Epsilon-greedy action choice; the greedy branch breaks ties toward
/// the lowest action index.
pub fn q_select_action(q: &QTable, state: usize, epsilon: f64, rng: &mut RunRng) -> usize {
    let draw: f64 = rng.random();
    if draw < epsilon {
        return rng.random_range(0..q.n_actions);
    }
    let mut best = 0;
    let mut best_value = q.get(state, 0);
    for a in 1..q.n_actions {
        let v = q.get(state, a);
        if v > best_value {
            best_value = v;
            best = a;
        }
    }
    best
}

/// Junior knowledge step: x + k_F * (x_r - x) + (x_s - x_r).
pub fn agsk_junior_step(x: &[f64], x_r: &[f64], x_s: &[f64], k_f: f64) -> Vec<f64> {
    x.iter()
        .zip(x_r.iter().zip(x_s))
        .map(|(&xi, (&ri, &si))| xi + k_f * (ri - xi) + (si - ri))
        .collect()
}

/// Senior knowledge step: x + k_F * (x_best - x) + (x_better - x_best).
pub fn agsk_senior_step(x: &[f64], x_best: &[f64], x_better: &[f64], k_f: f64) -> Vec<f64> {
    x.iter()
        .zip(x_best.iter().zip(x_better))
        .map(|(&xi, (&bi, &ti))| xi + k_f * (bi - xi) + (ti - bi))
        .collect()
}

/// Budget-accounted evaluation wrapper shared by every engine: counts
/// calls, maps non-finite objective values to +inf, tracks the running
/// best and flushes trace checkpoints.
struct RunState<'a> {
    objective: &'a mut dyn Objective,
    budget: u64,
    nfe: u64,
    best_fitness: f64,
    best_x: Vec<f64>,
    trace: Vec<(u64, f64)>,
    checkpoints: &'a [u64],
    next_checkpoint: usize,
}

impl<'a> RunState<'a> {
    fn new(objective: &'a mut dyn Objective, budget: u64, checkpoints: &'a [u64]) -> Self {
        RunState {
            objective,
            budget,
            nfe: 0,
            best_fitness: f64::INFINITY,
            best_x: Vec::new(),
            trace: Vec::new(),
            checkpoints,
            next_checkpoint: 0,
        }
    }

    fn exhausted(&self) -> bool {
        self.nfe >= self.budget
    }

    /// Evaluates x, or returns None once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.exhausted() {
            return None;
        }
        let raw = self.objective.evaluate(x);
        let value = if raw.is_finite() { raw } else { f64::INFINITY };
        self.nfe += 1;
        if value < self.best_fitness {
            self.best_fitness = value;
            self.best_x = x.to_vec();
        }
        while self.next_checkpoint < self.checkpoints.len()
            && self.checkpoints[self.next_checkpoint] <= self.nfe
        {
            self.trace
                .push((self.checkpoints[self.next_checkpoint], self.best_fitness));
            self.next_checkpoint += 1;
        }
        Some(value)
    }

    fn flush_remaining_checkpoints(&mut self) {
        while self.next_checkpoint < self.checkpoints.len() {
            self.trace
                .push((self.checkpoints[self.next_checkpoint], self.best_fitness));
            self.next_checkpoint += 1;
        }
    }
}

fn init_population(
    state: &mut RunState,
    n: usize,
    bounds: &[(f64, f64)],
    rng: &mut RunRng,
) -> Result<Population> {
    let mut members = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = bounds
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect();
        let fitness = state
            .eval(&x)
            .ok_or_else(|| Error::invalid_argument("budget smaller than initial population"))?;
        members.push(Individual { x, fitness });
    }
    Population::from_members(members)
}

/// Runs one seeded optimization to budget exhaustion. The trace records
/// the best fitness observed so far at each requested nfe checkpoint
/// (checkpoints must be ascending; pass [budget] for final-only).
pub fn run(
    config: &OptimizerConfig,
    objective: &mut dyn Objective,
    budget: u64,
    seed: u64,
    checkpoints: &[u64],
) -> Result<RunRecord> {
    let dimension = objective.dimension();
    if dimension == 0 {
        return Err(Error::invalid_argument("objective dimension is zero"));
    }
    let n_init = config.resolved_n_init(dimension);
    if budget < n_init as u64 {
        return Err(Error::invalid_argument(format!(
            "budget {budget} cannot cover the initial population of {n_init}"
        )));
    }
    let started = Instant::now();
    let mut rng = rng_from_seed(seed);
    let default_checkpoints = [budget];
    let checkpoints = if checkpoints.is_empty() {
        &default_checkpoints
    } else {
        checkpoints
    };
    let mut state = RunState::new(objective, budget, checkpoints);
    match config.algorithm {
        Algorithm::ClassicDe => run_classic_de(config, &mut state, n_init, &mut rng)?,
        Algorithm::Lshade | Algorithm::NlshadeRsp | Algorithm::Lsrtde => {
            run_shade_family(config, &mut state, n_init, &mut rng)?
        }
        Algorithm::Agsk => run_agsk(config, &mut state, n_init, &mut rng)?,
        Algorithm::Qensemble => run_qensemble(config, &mut state, n_init, &mut rng)?,
    }
    state.flush_remaining_checkpoints();
    let final_best = Individual {
        x: state.best_x.clone(),
        fitness: state.best_fitness,
    };
    Ok(RunRecord {
        seed,
        trace: state.trace,
        final_best,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// rand/1/bin with fixed F and CR and a constant population size.
fn run_classic_de(
    config: &OptimizerConfig,
    state: &mut RunState,
    n: usize,
    rng: &mut RunRng,
) -> Result<()> {
    let bounds = state.objective.bounds().to_vec();
    let mut pop = init_population(state, n, &bounds, rng)?;
    while !state.exhausted() {
        let mut next_members = pop.members.clone();
        for i in 0..pop.len() {
            let mutant = mutate_rand1(&pop, i, config.classic_f, rng)?;
            let mut trial =
                binomial_crossover(&pop.members[i].x, &mutant, config.classic_cr, rng);
            repair_midpoint(&mut trial, &pop.members[i].x, &bounds);
            let Some(fitness) = state.eval(&trial) else {
                break;
            };
            if fitness <= pop.members[i].fitness {
                next_members[i] = Individual { x: trial, fitness };
            }
        }
        pop.members = next_members;
        pop.sort();
        pop.generation += 1;
    }
    Ok(())
}

/// Success-history adaptive DE family. The three flavors share the
/// engine and differ in schedule shape, base-vector selection, F source
/// and CR handling:
/// - linear-shrink flavor: uniform r1, F and CR from the memory;
/// - rank-selection flavor: r1 rank-weighted, CR floor ramps linearly
///   to one across the budget;
/// - success-rate flavor: F centered on a tanh of the previous
///   generation's success rate, pbest pool widened/narrowed by it, and
///   CR resampled around 0.9 after a fully stagnant generation.
fn run_shade_family(
    config: &OptimizerConfig,
    state: &mut RunState,
    n_init: usize,
    rng: &mut RunRng,
) -> Result<()> {
    let rsp_base = config.algorithm == Algorithm::NlshadeRsp;
    let cr_ramp = config.algorithm == Algorithm::NlshadeRsp;
    let srtde = config.algorithm == Algorithm::Lsrtde;
    let bounds = state.objective.bounds().to_vec();
    let schedule = PopulationSchedule::new(
        n_init,
        config.n_min.min(n_init),
        state.budget,
        config.resolved_schedule(),
    )?;
    let mut pop = init_population(state, n_init, &bounds, rng)?;
    let mut memory = ShaMemory::new(config.memory_size, config.init_f, config.init_cr)?;
    let mut prev_sr: Option<f64> = None;
    let mut basis: Option<OrthogonalMatrix> = None;
    let mut gens_since_basis = 0u32;
    let mut stagnant_gens = 0u32;
    let mut best_before_gen = state.best_fitness;
    while !state.exhausted() {
        let n = pop.len();
        if config.use_eigen && (gens_since_basis >= 25 || stagnant_gens >= 10) {
            let superior: Vec<Vec<f64>> = pop.members[..n.div_ceil(2)]
                .iter()
                .map(|m| m.x.clone())
                .collect();
            basis = Some(eigen_basis(&superior));
            gens_since_basis = 0;
            stagnant_gens = 0;
        }
        let sr = prev_sr.unwrap_or(0.0);
        let mf = srtde_mf(sr);
        let pb = if srtde {
            srtde_pb(sr)
        } else {
            config.p_fraction
        };
        let mut successes = 0u64;
        let mut trials = 0u64;
        let mut success_set = SuccessSet::default();
        let mut replaced_parents: Vec<Vec<f64>> = Vec::new();
        let mut next_members = pop.members.clone();
        for i in 0..n {
            let (f, cr) = if srtde {
                let f = sample_f(mf, rng);
                let cr = if prev_sr == Some(0.0) {
                    sample_cr(0.9, rng)
                } else {
                    let slot = rng.random_range(0..memory.len());
                    sample_cr(memory.m_cr[slot], rng)
                };
                (f, cr)
            } else {
                sample_params(&memory, rng)
            };
            let cr = if cr_ramp {
                cr.max(state.nfe as f64 / state.budget as f64)
            } else {
                cr
            };
            let mutant = if rsp_base {
                mutate_pbest_rsp(&pop, i, f, pb, rng)?
            } else {
                mutate_current_to_pbest(&pop, i, f, pb, rng)?
            };
            let target = &pop.members[i].x;
            let mut trial = match &basis {
                Some(b) => eigen_crossover(target, &mutant, cr, b, rng),
                None => binomial_crossover(target, &mutant, cr, rng),
            };
            repair_midpoint(&mut trial, target, &bounds);
            let Some(fitness) = state.eval(&trial) else {
                break;
            };
            trials += 1;
            let parent_fitness = pop.members[i].fitness;
            if fitness <= parent_fitness {
                if fitness < parent_fitness {
                    successes += 1;
                    success_set.push(f, cr, parent_fitness - fitness);
                    replaced_parents.push(pop.members[i].x.clone());
                }
                next_members[i] = Individual { x: trial, fitness };
            }
        }
        pop.members = next_members;
        pop.sort();
        for parent in replaced_parents {
            pop.push_archive(parent, rng);
        }
        lehmer_update(&mut memory, &success_set, config.learning_rate);
        prev_sr = Some(success_rate(trials, successes));
        let target_size = schedule.size_at(state.nfe);
        if target_size < pop.len() {
            pop.shrink_to(target_size, rng);
        }
        pop.generation += 1;
        gens_since_basis += 1;
        if state.best_fitness < best_before_gen {
            stagnant_gens = 0;
        } else {
            stagnant_gens += 1;
        }
        best_before_gen = state.best_fitness;
    }
    Ok(())
}

/// current-to-pbest with the base index r1 drawn by rank-weighted
/// selection instead of uniformly.
fn mutate_pbest_rsp(
    pop: &Population,
    i: usize,
    f: f64,
    p_fraction: f64,
    rng: &mut RunRng,
) -> Result<Vec<f64>> {
    let n = pop.len();
    if n < 4 {
        return Err(Error::invalid_state(
            "current-to-pbest mutation needs >= 4 members",
        ));
    }
    let p_num = ((p_fraction * n as f64).ceil() as usize).clamp(1, n);
    let pbest = rng.random_range(0..p_num);
    let r1 = loop {
        let candidate = rsp_index(n, rng);
        if candidate != i {
            break candidate;
        }
    };
    let r2 = loop {
        let idx = rng.random_range(0..n + pop.archive.len());
        if idx != i && idx != r1 {
            break idx;
        }
    };
    let r2_x: &[f64] = if r2 < n {
        &pop.members[r2].x
    } else {
        &pop.archive[r2 - n]
    };
    Ok(pbest_combine(
        &pop.members[i].x,
        &pop.members[pbest].x,
        &pop.members[r1].x,
        r2_x,
        f,
    ))
}

/// Dual-phase knowledge sharing: per dimension, early generations draw
/// from rank neighbors (junior), late generations from the elite
/// (senior); the junior fraction decays as (1 - nfe/budget)^2 and each
/// dimension updates with probability k_R.
fn run_agsk(
    config: &OptimizerConfig,
    state: &mut RunState,
    n_init: usize,
    rng: &mut RunRng,
) -> Result<()> {
    let bounds = state.objective.bounds().to_vec();
    let schedule = PopulationSchedule::new(
        n_init,
        config.n_min.min(n_init),
        state.budget,
        config.resolved_schedule(),
    )?;
    let mut pop = init_population(state, n_init, &bounds, rng)?;
    while !state.exhausted() {
        let n = pop.len();
        let junior_fraction = {
            let remaining = 1.0 - state.nfe as f64 / state.budget as f64;
            remaining * remaining
        };
        let top = (0.1 * n as f64).ceil() as usize;
        let top = top.clamp(1, n);
        let mid_end = ((0.9 * n as f64).floor() as usize).clamp(top, n);
        let mut next_members = pop.members.clone();
        for i in 0..n {
            // junior sources: cyclic rank neighbors
            let better = &pop.members[(i + n - 1) % n].x;
            let worse = &pop.members[(i + 1) % n].x;
            let x = &pop.members[i].x;
            let junior = agsk_junior_step(x, better, worse, config.agsk_kf);
            // senior sources: top 10% best, middle 80% better
            let best_idx = rng.random_range(0..top);
            let better_idx = if mid_end > top {
                rng.random_range(top..mid_end)
            } else {
                rng.random_range(0..n)
            };
            let senior = agsk_senior_step(
                x,
                &pop.members[best_idx].x,
                &pop.members[better_idx].x,
                config.agsk_kf,
            );
            let mut trial = x.clone();
            for j in 0..trial.len() {
                if rng.random::<f64>() < config.agsk_kr {
                    trial[j] = if rng.random::<f64>() < junior_fraction {
                        junior[j]
                    } else {
                        senior[j]
                    };
                }
            }
            repair_midpoint(&mut trial, x, &bounds);
            let Some(fitness) = state.eval(&trial) else {
                break;
            };
            if fitness <= pop.members[i].fitness {
                next_members[i] = Individual { x: trial, fitness };
            }
        }
        pop.members = next_members;
        pop.sort();
        let target_size = schedule.size_at(state.nfe);
        if target_size < pop.len() {
            pop.shrink_to(target_size, rng);
        }
        pop.generation += 1;
    }
    Ok(())
}

const Q_DIVERSITY_BINS: usize = 4;
const Q_PHASE_BINS: usize = 4;
const Q_ACTIONS: usize = 4;

/// Population diversity: mean pairwise distance normalized by the bound
/// box diagonal, discretized into four bins.
fn diversity_bin(pop: &Population, bounds: &[(f64, f64)]) -> usize {
    let n = pop.len();
    if n < 2 {
        return 0;
    }
    let mut total = 0.0;
    let mut count = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let d: f64 = pop.members[i]
                .x
                .iter()
                .zip(&pop.members[j].x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            total += d;
            count += 1;
        }
    }
    let diagonal = bounds
        .iter()
        .map(|&(lo, hi)| (hi - lo) * (hi - lo))
        .sum::<f64>()
        .sqrt();
    let normalized = if diagonal > 0.0 {
        total / count as f64 / diagonal
    } else {
        0.0
    };
    if normalized < 0.05 {
        0
    } else if normalized < 0.15 {
        1
    } else if normalized < 0.30 {
        2
    } else {
        3
    }
}

fn phase_bin(nfe: u64, budget: u64) -> usize {
    ((Q_PHASE_BINS as u64 * nfe / budget.max(1)) as usize).min(Q_PHASE_BINS - 1)
}

fn q_state(pop: &Population, bounds: &[(f64, f64)], nfe: u64, budget: u64) -> usize {
    diversity_bin(pop, bounds) * Q_PHASE_BINS + phase_bin(nfe, budget)
}

/// Q-learning ensemble: one of four mutation operators (rand/1,
/// current-to-pbest, junior, senior) is chosen per generation by an
/// epsilon-greedy policy over a 16-state table; the reward is the
/// relative improvement of the best fitness per evaluation spent.
fn run_qensemble(
    config: &OptimizerConfig,
    state: &mut RunState,
    n_init: usize,
    rng: &mut RunRng,
) -> Result<()> {
    let bounds = state.objective.bounds().to_vec();
    let schedule = PopulationSchedule::new(
        n_init,
        config.n_min.min(n_init),
        state.budget,
        config.resolved_schedule(),
    )?;
    let mut pop = init_population(state, n_init, &bounds, rng)?;
    let mut memory = ShaMemory::new(config.memory_size, config.init_f, config.init_cr)?;
    let mut q = QTable::new(Q_DIVERSITY_BINS * Q_PHASE_BINS, Q_ACTIONS);
    while !state.exhausted() {
        let n = pop.len();
        let s = q_state(&pop, &bounds, state.nfe, state.budget);
        let action = q_select_action(&q, s, config.q_epsilon, rng);
        let best_before = state.best_fitness;
        let nfe_before = state.nfe;
        let mut success_set = SuccessSet::default();
        let mut replaced_parents: Vec<Vec<f64>> = Vec::new();
        let mut next_members = pop.members.clone();
        let top = ((0.1 * n as f64).ceil() as usize).clamp(1, n);
        let mid_end = ((0.9 * n as f64).floor() as usize).clamp(top, n);
        for i in 0..n {
            let (f, cr) = sample_params(&memory, rng);
            let x = &pop.members[i].x;
            let mutant = match action {
                0 => mutate_rand1(&pop, i, f, rng)?,
                1 => mutate_current_to_pbest(&pop, i, f, config.p_fraction, rng)?,
                2 => {
                    let better = &pop.members[(i + n - 1) % n].x;
                    let worse = &pop.members[(i + 1) % n].x;
                    agsk_junior_step(x, better, worse, config.agsk_kf)
                }
                _ => {
                    let best_idx = rng.random_range(0..top);
                    let better_idx = if mid_end > top {
                        rng.random_range(top..mid_end)
                    } else {
                        rng.random_range(0..n)
                    };
                    agsk_senior_step(
                        x,
                        &pop.members[best_idx].x,
                        &pop.members[better_idx].x,
                        config.agsk_kf,
                    )
                }
            };
            let mut trial = binomial_crossover(x, &mutant, cr, rng);
            repair_midpoint(&mut trial, x, &bounds);
            let Some(fitness) = state.eval(&trial) else {
                break;
            };
            let parent_fitness = pop.members[i].fitness;
            if fitness <= parent_fitness {
                if fitness < parent_fitness {
                    success_set.push(f, cr, parent_fitness - fitness);
                    replaced_parents.push(pop.members[i].x.clone());
                }
                next_members[i] = Individual { x: trial, fitness };
            }
        }
        pop.members = next_members;
        pop.sort();
        for parent in replaced_parents {
            pop.push_archive(parent, rng);
        }
        lehmer_update(&mut memory, &success_set, config.learning_rate);
        let spent = (state.nfe - nfe_before).max(1) as f64;
        let reward =
            (best_before - state.best_fitness) / (best_before.abs() + 1e-12) / spent;
        let target_size = schedule.size_at(state.nfe);
        if target_size < pop.len() {
            pop.shrink_to(target_size, rng);
        }
        let s_next = q_state(&pop, &bounds, state.nfe, state.budget);
        q_update(&mut q, s, action, reward, s_next, config.q_alpha, config.q_gamma);
        pop.generation += 1;
    }
    Ok(())
}
