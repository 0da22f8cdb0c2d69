use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qcw", version, about = "Contextuality, causal-order and joint-measurability certificates")]
pub struct Cli {
    /// Worker threads for parallel searches.
    #[arg(long, global = true, env = "QCW_THREADS")]
    pub threads: Option<usize>,
    /// Write a run manifest to this path.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scenario hypergraphs and joint-measurability structures.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// α, θ, α* of the orthogonality graph and β for an edge distribution.
    Invariants(InvariantsArgs),
    #[command(subcommand)]
    Witness(WitnessCmd),
    #[command(subcommand)]
    Quantum(QuantumCmd),
    /// Joint measurability of qubit POVMs.
    #[command(subcommand)]
    Jm(JmCmd),
    /// Causal polytopes and games.
    #[command(subcommand)]
    Causal(CausalCmd),
    /// Classical process environments and process functions.
    #[command(subcommand)]
    Process(ProcessCmd),
    /// Discrimination via logically consistent process functions.
    #[command(subcommand)]
    Lopf(LopfCmd),
    #[command(subcommand)]
    Corpus(CorpusCmd),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioSource {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "builtin")]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario: gamma18, gamma5, or a quantum construction name.
    #[arg(long)]
    pub builtin: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct EdgeWeights {
    /// Uniform distribution over hyperedges (the default).
    #[arg(long, conflicts_with = "q")]
    pub uniform_q: bool,
    /// Hyperedge distribution in listing order, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCmd {
    /// Validate a scenario or a joint-measurability structure.
    Validate {
        #[command(flatten)]
        source: ScenarioSource,
        /// Joint-measurability structure JSON file.
        #[arg(long, conflicts_with_all = ["scenario", "builtin"])]
        jms: Option<PathBuf>,
    },
    /// KS-colourings; exits 3 when there are none.
    Colorings {
        #[command(flatten)]
        source: ScenarioSource,
        /// Stop after this many colourings.
        #[arg(long)]
        limit: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct InvariantsArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    /// Vertex weights JSON object `{"<vertex>": w, ...}`.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[command(flatten)]
    pub edges: EdgeWeights,
    /// Skip β.
    #[arg(long)]
    pub no_beta: bool,
}

#[derive(Debug, Subcommand)]
pub enum WitnessCmd {
    /// `Corr ≤ β`; exits 3 when not violated.
    Logical {
        #[command(flatten)]
        source: ScenarioSource,
        /// Prepare-and-measure data JSON file.
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        edges: EdgeWeights,
    },
    /// `R ≤ α + (α* − α)/p0 · (1 − Corr)/(1 − β)`; exits 3 when not violated.
    Statistical(StatisticalArgs),
    /// Success probability of an entanglement-assisted one-shot code.
    Oneshot {
        #[arg(long)]
        task: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct StatisticalArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[command(flatten)]
    pub edges: EdgeWeights,
    /// Plug-in constants instead of a scenario and data.
    #[arg(long, requires_all = ["alpha_star", "beta", "p0", "corr", "r"], conflicts_with_all = ["scenario", "builtin", "data"])]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_star: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub corr: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RealizationSource {
    /// Built-in construction: cega18, kcbs, peres24, shift.
    #[arg(long, conflicts_with_all = ["scenario", "rays"])]
    pub builtin: Option<String>,
    #[arg(long, requires = "rays")]
    pub scenario: Option<PathBuf>,
    /// Ray JSON file `{"rays": {"<vertex>": [[re, im], ...]}}`.
    #[arg(long, requires = "scenario")]
    pub rays: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum QuantumCmd {
    /// Completeness and orthogonality of a ray realization; exits 3 when invalid.
    Validate {
        #[command(flatten)]
        source: RealizationSource,
    },
    /// Born-rule model and its consistent-exclusivity check.
    Born {
        #[command(flatten)]
        source: RealizationSource,
        /// State JSON file `{"pure": [...]}` or `{"density": [[...]]}`.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Vertex weights JSON object; adds the weighted sum to the report.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Corr under depolarizing measurement noise, with the crossing of β.
    NoiseSweep {
        #[command(flatten)]
        source: RealizationSource,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        /// Crossing level; defaults to β for the uniform distribution.
        #[arg(long)]
        target: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Peres-Mermin operator identities and valuation count.
    PmAudit,
    /// Print a built-in construction with entanglement flags.
    Builtin {
        #[arg(long)]
        name: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Specker,
    Cycle,
}

#[derive(Debug, Subcommand)]
pub enum JmCmd {
    /// Joint-measurability SDP; exits 3 when incompatible.
    Feasible {
        /// POVM JSON file.
        #[arg(long)]
        povms: PathBuf,
    },
    /// Noise threshold η* of a family of noisy spin measurements.
    Threshold {
        /// Pauli indices (1 = X, 2 = Y, 3 = Z), comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "planar")]
        paulis: Option<Vec<usize>>,
        /// N equally spaced axes in the x-z plane.
        #[arg(long)]
        planar: Option<usize>,
    },
    /// Qubit POVMs realizing a Specker or cycle structure; exits 3 if a subset check fails.
    Surgery {
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long)]
        n: usize,
    },
    /// Pentagonal inequality bounds, optionally evaluated on a model.
    Pentagon {
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GameSource {
    /// Built-in game: gyni, afbw, gynin.
    #[arg(long, conflicts_with = "game_file")]
    pub game: Option<String>,
    /// Game JSON file.
    #[arg(long)]
    pub game_file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CausalCmd {
    /// Deterministic causal vertices of an (N, M, D) scenario.
    Vertices {
        /// `N,M,D`.
        #[arg(long)]
        scenario: String,
        /// Include the vertices themselves, not just the count.
        #[arg(long)]
        list: bool,
    },
    /// Causal bound of a game by vertex maximization.
    Bound {
        #[command(flatten)]
        game: GameSource,
        /// Expected `N,M,D`; rejected if it differs from the game's.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Causal polytope membership; exits 3 when the correlation is causal.
    Check {
        /// Correlation JSON file.
        #[arg(long)]
        correlation: PathBuf,
        /// Also report the quasi-process embedding of the correlation.
        #[arg(long)]
        embed: bool,
    },
    /// Value of a game on a correlation.
    Game {
        #[command(flatten)]
        game: GameSource,
        #[arg(long)]
        correlation: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ProcessSource {
    /// Process JSON file.
    #[arg(long, conflicts_with = "builtin")]
    pub process: Option<PathBuf>,
    /// Built-in environment: afbw, bfw, identity-loop.
    #[arg(long)]
    pub builtin: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum ProcessCmd {
    /// Logical consistency over all deterministic reply tuples; exits 3 when inconsistent.
    Check {
        #[command(flatten)]
        source: ProcessSource,
    },
    /// Correlation generated by a process and local interventions.
    Correlate {
        #[command(flatten)]
        source: ProcessSource,
        /// Intervention JSON file.
        #[arg(long, conflicts_with = "copy")]
        interventions: Option<PathBuf>,
        /// Copy interventions: x = i, o = a.
        #[arg(long)]
        copy: bool,
        /// Settings per party.
        #[arg(long, default_value_t = 2)]
        settings: usize,
        /// Also decide causal polytope membership.
        #[arg(long)]
        check_causal: bool,
    },
    /// All consistent process functions over the given alphabets.
    Enumerate {
        #[arg(long)]
        parties: usize,
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
        #[arg(long)]
        list: bool,
    },
    /// Best game value over process functions and deterministic strategies.
    NomicBound(NomicArgs),
}

#[derive(Debug, Args)]
pub struct NomicArgs {
    #[command(flatten)]
    pub game: GameSource,
    /// Evaluate a single process function instead of searching.
    #[command(flatten)]
    pub source: ProcessSource,
    /// Every consistent process function.
    #[arg(long, conflicts_with_all = ["samples", "process", "builtin"])]
    pub exhaustive: bool,
    /// Checkpoint file for the exhaustive search; resumed when present.
    #[arg(long, requires = "exhaustive")]
    pub state: Option<PathBuf>,
    /// Process functions evaluated between checkpoints.
    #[arg(long, default_value_t = 64, requires = "exhaustive")]
    pub chunk: usize,
    /// Stop with exit code 4 after this many chunks, keeping the checkpoint.
    #[arg(long, requires = "state")]
    pub budget_chunks: Option<usize>,
    /// Randomized audit sample size.
    #[arg(long, conflicts_with_all = ["process", "builtin"])]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct OmegaSource {
    /// Boolean process function JSON file `{"tables": [[...], ...]}`; AF/BW by default.
    #[arg(long)]
    pub omega: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LopfCmd {
    /// Correspondence table, or the protocol run on one product input.
    Shift {
        #[command(flatten)]
        omega: OmegaSource,
        /// Product input over `0 1 + -`, e.g. `+01`.
        #[arg(long)]
        input: Option<String>,
    },
    /// The orthonormal basis S_ω and its Gram deviation.
    Basis {
        #[command(flatten)]
        omega: OmegaSource,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusCmd {
    /// Run every case in a corpus directory; exits 3 when any case fails.
    Run {
        #[arg(long, default_value = "corpus")]
        dir: PathBuf,
    },
}
