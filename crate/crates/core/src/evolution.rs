//! The 1+λ evolutionary algorithm and episode-based fitness evaluation.
//!
//! Every random draw is derived from the run seed, so a run is reproducible
//! bit-for-bit, whether offspring are evaluated serially or in parallel.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::env::{Environment, FrameSkip, DEFAULT_FRAME_CAP, DEFAULT_P_FSKIP};
use crate::error::{CgpError, EnvError, Result};
use crate::graph::{Genome, Program};

/// Number of program inputs: the red, green and blue planes.
pub const PIXEL_INPUTS: usize = 3;

const MUTATION_STREAM: u64 = 0x6d75_7461_7465;
const RANDOM_SEARCH_STREAM: u64 = 0x7261_6e64_6f6d;

/// How a genome is scored on an environment.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSettings {
    pub episodes: usize,
    pub p_fskip: f64,
    /// Cap on counted (non-skipped) frames per episode.
    pub frame_cap: u64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            episodes: 1,
            p_fskip: DEFAULT_P_FSKIP,
            frame_cap: DEFAULT_FRAME_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub lambda: usize,
    pub n_eval: usize,
    pub m_nodes: f64,
    pub m_output: f64,
    pub columns: usize,
    pub recurrency: f64,
    pub n_input: usize,
    pub n_output: usize,
    pub eval: EvalSettings,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            lambda: 9,
            n_eval: 10_000,
            m_nodes: 0.1,
            m_output: 0.6,
            columns: 40,
            recurrency: 0.1,
            n_input: PIXEL_INPUTS,
            n_output: 18,
            eval: EvalSettings::default(),
            seed: 0,
        }
    }
}

impl EvolutionConfig {
    /// `⌈n_eval / λ⌉`.
    pub fn generations(&self) -> usize {
        self.n_eval.div_ceil(self.lambda)
    }
}

/// Mixes a sequence of integers into one seed (SplitMix64 finalizer).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243f_6a88_85a3_08d3;
    for &p in parts {
        h = h.wrapping_add(p).wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

/// Seed under which offspring `index` of `generation` is evaluated. The
/// initial elite is generation 0, index 0.
pub fn offspring_seed(run_seed: u64, generation: usize, index: usize) -> u64 {
    derive_seed(&[run_seed, generation as u64, index as u64])
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Number of node genes and output genes replaced by one mutation.
pub fn mutation_counts(genome: &Genome, m_nodes: f64, m_output: f64) -> (usize, usize) {
    let node_genes = genome.genes().len() - genome.n_output();
    (
        round_half_up(m_nodes * node_genes as f64).min(node_genes),
        round_half_up(m_output * genome.n_output() as f64).min(genome.n_output()),
    )
}

/// Copies `parent` and redraws an exact number of distinct node genes and
/// output genes from `[0, 1)`.
pub fn mutate<R: Rng + ?Sized>(
    parent: &Genome,
    m_nodes: f64,
    m_output: f64,
    rng: &mut R,
) -> Genome {
    let (k_nodes, k_outputs) = mutation_counts(parent, m_nodes, m_output);
    let n_output = parent.n_output();
    let node_genes = parent.genes().len() - n_output;
    let mut child = parent.clone();
    for i in sample(rng, node_genes, k_nodes) {
        child.set_gene(n_output + i, rng.gen());
    }
    for i in sample(rng, n_output, k_outputs) {
        child.set_gene(i, rng.gen());
    }
    child
}

/// One frame as seen by an episode observer.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameEvent {
    /// Index over all frames, skipped ones included.
    pub frame: u64,
    pub action: usize,
    pub reward: f64,
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeSummary {
    pub total_reward: f64,
    pub counted_frames: u64,
    pub total_frames: u64,
}

fn check_shape<E: Environment + ?Sized>(program: &Program, env: &E) -> Result<()> {
    if program.n_input() != PIXEL_INPUTS {
        return Err(CgpError::InputCount {
            expected: PIXEL_INPUTS,
            actual: program.n_input(),
        });
    }
    if program.n_output() != env.n_actions() {
        return Err(CgpError::ActionCount {
            outputs: program.n_output(),
            actions: env.n_actions(),
        });
    }
    Ok(())
}

/// Plays one episode from a reset program state until the environment ends
/// it or `frame_cap` counted frames have been played.
pub fn run_episode<E, F>(
    program: &mut Program,
    env: &mut E,
    settings: &EvalSettings,
    eval_seed: u64,
    episode: usize,
    mut observer: F,
) -> Result<EpisodeSummary>
where
    E: Environment + ?Sized,
    F: FnMut(&FrameEvent, &Program),
{
    program.reset_state();
    let env_seed = derive_seed(&[eval_seed, episode as u64, 0]);
    let skip_seed = derive_seed(&[eval_seed, episode as u64, 1]);
    let mut observation = env.reset(env_seed)?;
    let mut skipper = FrameSkip::new(settings.p_fskip, skip_seed);
    let mut total_reward = 0.0;
    while skipper.counted_frames() < settings.frame_cap {
        let frame = skipper.total_frames();
        let outcome = skipper.step(env, &observation, |obs| program.act(&obs.to_inputs()))?;
        total_reward += outcome.transition.reward;
        observer(
            &FrameEvent {
                frame,
                action: outcome.action,
                reward: outcome.transition.reward,
                skipped: outcome.skipped,
            },
            program,
        );
        if outcome.transition.done {
            break;
        }
        observation = outcome.transition.observation;
    }
    Ok(EpisodeSummary {
        total_reward,
        counted_frames: skipper.counted_frames(),
        total_frames: skipper.total_frames(),
    })
}

/// Mean total reward over `settings.episodes` episodes.
pub fn evaluate<E>(
    genome: &Genome,
    env: &mut E,
    settings: &EvalSettings,
    eval_seed: u64,
) -> Result<f64>
where
    E: Environment + ?Sized,
{
    let mut program = genome.decode();
    check_shape(&program, env)?;
    let mut total = 0.0;
    for episode in 0..settings.episodes {
        total +=
            run_episode(&mut program, env, settings, eval_seed, episode, |_, _| {})?.total_reward;
    }
    Ok(total / settings.episodes as f64)
}

/// Per-generation log line.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRecord {
    pub generation: usize,
    pub evaluations: usize,
    pub best: f64,
}

impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "generation {} evals {} best {}",
            self.generation, self.evaluations, self.best
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionState {
    pub elite: Genome,
    pub elite_fitness: f64,
    /// Seed the elite's fitness was measured under; replaying with it
    /// reproduces the fitness.
    pub elite_eval_seed: u64,
    pub evaluations_used: usize,
    pub generation: usize,
    pub log: Vec<LogRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    Serial,
    Parallel,
}

/// Builds one environment instance per evaluation worker.
pub trait EnvFactory: Sync {
    fn make(&self) -> Result<Box<dyn Environment + Send>, EnvError>;
}

impl<F> EnvFactory for F
where
    F: Fn() -> Result<Box<dyn Environment + Send>, EnvError> + Sync,
{
    fn make(&self) -> Result<Box<dyn Environment + Send>, EnvError> {
        self()
    }
}

/// Runs 1+λ evolution for `⌈n_eval/λ⌉` generations.
///
/// Each generation mutates the elite λ times. The best offspring (lowest
/// index among equals) replaces the elite when its fitness is at least the
/// elite's, which lets neutral mutations drift through the population.
pub fn run_evolution(
    config: &EvolutionConfig,
    factory: &dyn EnvFactory,
    parallelism: Parallelism,
) -> Result<EvolutionState> {
    assert!(
        config.lambda > 0 && config.n_eval > 0,
        "lambda and n_eval must be positive"
    );
    let workers = match parallelism {
        Parallelism::Serial => 1,
        Parallelism::Parallel => config.lambda,
    };
    let mut envs = (0..workers)
        .map(|_| factory.make())
        .collect::<Result<Vec<_>, _>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, MUTATION_STREAM]));
    let elite = Genome::random(
        config.n_input,
        config.n_output,
        config.columns,
        config.recurrency,
        &mut rng,
    )?;
    let elite_eval_seed = offspring_seed(config.seed, 0, 0);
    let elite_fitness = evaluate(&elite, &mut envs[0], &config.eval, elite_eval_seed)?;
    let mut state = EvolutionState {
        elite,
        elite_fitness,
        elite_eval_seed,
        evaluations_used: 1,
        generation: 0,
        log: vec![LogRecord {
            generation: 0,
            evaluations: 1,
            best: elite_fitness,
        }],
    };

    for generation in 1..=config.generations() {
        let offspring: Vec<Genome> = (0..config.lambda)
            .map(|_| mutate(&state.elite, config.m_nodes, config.m_output, &mut rng))
            .collect();
        let seeds: Vec<u64> = (0..config.lambda)
            .map(|i| offspring_seed(config.seed, generation, i))
            .collect();
        let fitness: Vec<f64> = match parallelism {
            Parallelism::Serial => offspring
                .iter()
                .zip(&seeds)
                .map(|(g, &s)| evaluate(g, &mut envs[0], &config.eval, s))
                .collect::<Result<_>>()?,
            Parallelism::Parallel => offspring
                .par_iter()
                .zip(&seeds)
                .zip(envs.par_iter_mut())
                .map(|((g, &s), env)| evaluate(g, env, &config.eval, s))
                .collect::<Result<_>>()?,
        };
        state.evaluations_used += config.lambda;
        state.generation = generation;

        let mut best: Option<usize> = None;
        for (i, &f) in fitness.iter().enumerate() {
            if best.is_none_or(|b| f > fitness[b]) {
                best = Some(i);
            }
        }
        if let Some(b) = best.filter(|&b| fitness[b] >= state.elite_fitness) {
            state.elite = offspring[b].clone();
            state.elite_fitness = fitness[b];
            state.elite_eval_seed = seeds[b];
        }
        state.log.push(LogRecord {
            generation,
            evaluations: state.evaluations_used,
            best: state.elite_fitness,
        });
    }
    Ok(state)
}

/// Best fitness among `samples` uniformly random genomes, each evaluated
/// under its own derived seed. A baseline for judging search.
pub fn random_search(
    config: &EvolutionConfig,
    factory: &dyn EnvFactory,
    samples: usize,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, RANDOM_SEARCH_STREAM]));
    let genomes = (0..samples)
        .map(|_| {
            Genome::random(
                config.n_input,
                config.n_output,
                config.columns,
                config.recurrency,
                &mut rng,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let scores = genomes
        .par_iter()
        .enumerate()
        .map_init(
            || factory.make(),
            |env, (i, g)| {
                let env = env
                    .as_mut()
                    .map_err(|e| CgpError::Structure(e.to_string()))?;
                let seed = derive_seed(&[config.seed, RANDOM_SEARCH_STREAM, i as u64]);
                evaluate(g, env, &config.eval, seed)
            },
        )
        .collect::<Result<Vec<f64>>>()?;
    Ok(scores.into_iter().fold(f64::NEG_INFINITY, f64::max))
}
