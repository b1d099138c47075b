//! The `popmatch` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use popmatch_core::fpras::{self, CountMode, EstimateParams};
use popmatch_core::hardness;
use popmatch_core::hat::{self, HatVerdict, HatViolation, Vertex};
use popmatch_core::oracle::{Oracle, DEFAULT_STATE_LIMIT};
use popmatch_core::switching::{self, ChaVerdict, ChaViolation};
use popmatch_core::{CountResult, CountValue, Error, Instance, Kind, Matching};
use serde_json::{json, Value};

use crate::error::FormatError;
use crate::format;

/// Environment variable overriding the oracle's state limit.
pub const ORACLE_LIMIT_VAR: &str = "POPMATCH_ORACLE_LIMIT";

#[derive(Debug, Parser)]
#[command(
    name = "popmatch",
    version,
    about = "Find, check and count popular matchings in house allocation"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    pub output: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Switching-set enumeration (CHA, strict lists).
    Switching,
    /// Sampling estimate through perfect matchings (HA/HAT, complete lists).
    Fpras,
    /// Exact permanent of the perfect-matching instance (HA/HAT, complete lists).
    ExactPm,
    /// Brute force.
    Oracle,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exit 0 if a popular matching exists, 1 otherwise.
    Check { file: PathBuf },
    /// Print one popular matching.
    Find { file: PathBuf },
    /// Count popular matchings.
    Count {
        file: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Required with `--method fpras`.
        #[arg(long)]
        seed: Option<u64>,
        /// Largest side counted exactly with `--method exact-pm`.
        #[arg(long, default_value_t = fpras::DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
    },
    /// Print the perfect-matching instance of a HA/HAT instance.
    ReduceHat { file: PathBuf },
    /// Print the CHA instance built from a bipartite graph.
    ReduceCha { graph: PathBuf },
    /// Print the switching graph of a popular matching.
    ExportSwitching {
        file: PathBuf,
        #[arg(long)]
        matching: Option<PathBuf>,
    },
    /// Compare matchings of a graph with popular matchings of its CHA image.
    CrossCheck { graph: PathBuf },
    /// Decide whether a matching is popular.
    Validate {
        file: PathBuf,
        #[arg(long)]
        matching: PathBuf,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ORACLE_LIMIT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::OracleLimit { .. }) => EXIT_ORACLE_LIMIT,
            CliError::Format {
                source: FormatError::Core(Error::OracleLimit { .. }),
                ..
            } => EXIT_ORACLE_LIMIT,
            _ => EXIT_USAGE,
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let oracle = match oracle_from_env() {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut ctx = Context {
        output: cli.output,
        oracle,
        out,
        err,
    };
    match ctx.dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {e}");
            e.exit_code()
        }
    }
}

fn oracle_from_env() -> Result<Oracle, CliError> {
    match std::env::var(ORACLE_LIMIT_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Oracle::new)
            .map_err(|_| CliError::Usage(format!("{ORACLE_LIMIT_VAR} must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(Oracle::new(DEFAULT_STATE_LIMIT)),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn in_file<T>(path: &Path, r: Result<T, FormatError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Format {
        path: path.display().to_string(),
        source,
    })
}

struct Context<'a> {
    output: OutputFormat,
    oracle: Oracle,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Context<'_> {
    fn dispatch(&mut self, command: Command) -> Result<i32, CliError> {
        match command {
            Command::Check { file } => self.check(&file),
            Command::Find { file } => self.find(&file),
            Command::Count {
                file,
                method,
                epsilon,
                delta,
                seed,
                exact_limit,
            } => self.count(&file, method, epsilon, delta, seed, exact_limit),
            Command::ReduceHat { file } => self.reduce_hat(&file),
            Command::ReduceCha { graph } => self.reduce_cha(&graph),
            Command::ExportSwitching { file, matching } => self.export_switching(&file, matching.as_deref()),
            Command::CrossCheck { graph } => self.cross_check(&graph),
            Command::Validate { file, matching } => self.validate(&file, &matching),
        }
    }

    /// Reads an instance and adds last resorts when the file has none.
    fn instance(&mut self, path: &Path) -> Result<Instance, CliError> {
        let inst = in_file(path, format::parse_instance(&read(path)?))?;
        if inst.last_resorts_added() {
            return Ok(inst);
        }
        writeln!(self.err, "note: last-resort houses added to {}", path.display())?;
        Ok(inst.add_last_resorts()?)
    }

    fn emit(&mut self, text: &str, value: Value) -> Result<(), CliError> {
        match self.output {
            OutputFormat::Text => self.out.write_all(text.as_bytes())?,
            OutputFormat::Json => writeln!(self.out, "{}", serde_json::to_string(&value).expect("json value"))?,
        }
        Ok(())
    }

    fn find_popular(&self, inst: &Instance) -> Result<Option<Matching>, CliError> {
        Ok(match inst.kind() {
            Kind::Cha => switching::find_popular_cha(inst)?,
            Kind::Ha | Kind::Hat => hat::find_popular_hat(inst)?,
        })
    }

    fn check(&mut self, path: &Path) -> Result<i32, CliError> {
        let inst = self.instance(path)?;
        let exists = self.find_popular(&inst)?.is_some();
        let text = if exists {
            "popular matching exists\n"
        } else {
            "no popular matching\n"
        };
        self.emit(text, json!({ "exists": exists }))?;
        Ok(if exists { EXIT_OK } else { EXIT_NEGATIVE })
    }

    fn find(&mut self, path: &Path) -> Result<i32, CliError> {
        let inst = self.instance(path)?;
        match self.find_popular(&inst)? {
            Some(m) => {
                self.emit(
                    &format::write_matching(&inst, &m),
                    json!({ "matching": pairs_json(&inst, &m) }),
                )?;
                Ok(EXIT_OK)
            }
            None => {
                self.emit("no popular matching\n", json!({ "matching": null }))?;
                Ok(EXIT_NEGATIVE)
            }
        }
    }

    fn count(
        &mut self,
        path: &Path,
        method: Method,
        epsilon: f64,
        delta: f64,
        seed: Option<u64>,
        exact_limit: usize,
    ) -> Result<i32, CliError> {
        let inst = self.instance(path)?;
        let result = match method {
            Method::Switching => CountResult::exact(switching::count_popular_cha(&inst)?),
            Method::Oracle => CountResult::oracle(self.oracle.count_popular(&inst)?),
            Method::ExactPm => fpras::count_popular_hat(&inst, CountMode::Exact { limit: exact_limit })?,
            Method::Fpras => {
                let seed = seed.ok_or_else(|| CliError::Usage("--method fpras needs --seed".into()))?;
                fpras::count_popular_hat(&inst, CountMode::Estimate(EstimateParams::new(epsilon, delta, seed)?))?
            }
        };
        let count = match &result.value {
            CountValue::Integer(n) => Value::String(n.to_string()),
            CountValue::Estimate(x) => json!(x),
        };
        let record = json!({
            "count": count,
            "method": result.method.as_str(),
            "epsilon": result.epsilon,
            "delta": result.delta,
            "seed": result.seed,
        });
        self.emit(&format!("{}\n", result.value), record)?;
        Ok(EXIT_OK)
    }

    fn reduce_hat(&mut self, path: &Path) -> Result<i32, CliError> {
        let inst = self.instance(path)?;
        let r = fpras::build_reduction(&inst)?;
        let left: Vec<String> = (0..r.graph.left()).map(|i| r.left_label(&inst, i)).collect();
        let right: Vec<&str> = (0..r.graph.right()).map(|j| r.right_label(&inst, j)).collect();
        let mut text = format!(
            "# dummies {}\n# left {}\n# right {}\n",
            r.dummy_count,
            left.join(" "),
            right.join(" ")
        );
        text.push_str(&format::write_graph(&r.graph));
        let edges: Vec<[usize; 2]> = r.graph.edges().map(|(u, v)| [u + 1, v + 1]).collect();
        let removed: Vec<&str> = r.removed_houses.iter().map(|&h| inst.house_label(h)).collect();
        self.emit(
            &text,
            json!({ "dummy_count": r.dummy_count, "left": left, "right": right, "edges": edges, "removed_houses": removed }),
        )?;
        Ok(EXIT_OK)
    }

    fn reduce_cha(&mut self, path: &Path) -> Result<i32, CliError> {
        let g = in_file(path, format::parse_graph(&read(path)?))?;
        let r = hardness::reduce_matching_to_cha(&g)?;
        let stripped = r.stripped_left.len() + r.stripped_right.len();
        if stripped > 0 {
            writeln!(self.err, "warning: {stripped} isolated vertices dropped")?;
        }
        let text = format::write_instance(&r.instance);
        let instance: Value = serde_json::from_str(&text).expect("instance json");
        self.emit(
            &text,
            json!({ "instance": instance, "base_matching": pairs_json(&r.instance, &r.base_matching) }),
        )?;
        Ok(EXIT_OK)
    }

    fn export_switching(&mut self, path: &Path, matching: Option<&Path>) -> Result<i32, CliError> {
        let inst = self.instance(path)?;
        let m = match matching {
            Some(mp) => in_file(mp, format::parse_matching(&inst, &read(mp)?))?,
            None => match switching::find_popular_cha(&inst)? {
                Some(m) => m,
                None => {
                    writeln!(self.err, "no popular matching")?;
                    return Ok(EXIT_NEGATIVE);
                }
            },
        };
        let sg = switching::build_switching_graph(&inst, &m)?;
        let edges: Vec<Value> = sg
            .edges()
            .iter()
            .map(|e| {
                json!({
                    "src": sg.house_label(e.from),
                    "dst": sg.house_label(e.to),
                    "weight": e.weight.value(),
                    "agent": sg.agent_label(e.agent),
                })
            })
            .collect();
        let unsat: serde_json::Map<String, Value> = inst
            .house_ids()
            .map(|h| (sg.house_label(h).to_string(), json!(sg.unsat(h))))
            .collect();
        self.emit(&format::write_switching(&sg), json!({ "edges": edges, "unsat": unsat }))?;
        Ok(EXIT_OK)
    }

    fn cross_check(&mut self, path: &Path) -> Result<i32, CliError> {
        let g = in_file(path, format::parse_graph(&read(path)?))?;
        let r = hardness::cross_check(&g, &self.oracle)?;
        let show = |x: &Option<popmatch_core::BigUint>| x.as_ref().map_or("-".to_string(), |n| n.to_string());
        let verdict = if r.is_degenerate() {
            "degenerate"
        } else if r.is_consistent() {
            "consistent"
        } else {
            "MISMATCH"
        };
        let text = format!(
            "matchings {}\nswitching {}\noracle {}\n{verdict}\n",
            r.matchings,
            show(&r.switching),
            show(&r.oracle)
        );
        self.emit(
            &text,
            json!({
                "matchings": r.matchings.to_string(),
                "switching": r.switching.as_ref().map(|n| n.to_string()),
                "oracle": r.oracle.as_ref().map(|n| n.to_string()),
                "consistent": r.is_consistent(),
                "degenerate": r.is_degenerate(),
                "stripped_vertices": r.stripped_vertices,
            }),
        )?;
        Ok(if r.is_consistent() { EXIT_OK } else { EXIT_NEGATIVE })
    }

    fn validate(&mut self, path: &Path, matching: &Path) -> Result<i32, CliError> {
        let inst = self.instance(path)?;
        let m = in_file(matching, format::parse_matching(&inst, &read(matching)?))?;
        let reason = match inst.kind() {
            Kind::Cha => match switching::is_popular_cha(&inst, &m)? {
                ChaVerdict::Popular => None,
                ChaVerdict::NotPopular(v) => Some(describe_cha(&inst, &v)),
            },
            Kind::Ha | Kind::Hat => match hat::is_popular_hat(&inst, &m)? {
                HatVerdict::Popular => None,
                HatVerdict::NotPopular(v) => Some(describe_hat(&inst, &v)),
            },
        };
        let text = match &reason {
            None => "popular\n".to_string(),
            Some(r) => format!("not popular: {r}\n"),
        };
        self.emit(&text, json!({ "popular": reason.is_none(), "reason": reason }))?;
        Ok(if reason.is_none() { EXIT_OK } else { EXIT_NEGATIVE })
    }
}

fn pairs_json(inst: &Instance, m: &Matching) -> Value {
    m.labelled_pairs(inst).into_iter().map(|(a, h)| json!([a, h])).collect()
}

fn describe_hat(inst: &Instance, v: &HatViolation) -> String {
    match v {
        HatViolation::Unmatched(a) => format!("{} is unmatched", inst.agent_label(*a)),
        HatViolation::FirstChoiceNotMaximum {
            size,
            maximum,
            uncovered,
            wasted_edge,
        } => {
            let mut s = format!("{size} agents on first choices where {maximum} fit");
            match (uncovered, wasted_edge) {
                (Some(Vertex::Agent(a)), _) => s += &format!(", {} should hold a first choice", inst.agent_label(*a)),
                (Some(Vertex::House(h)), _) => s += &format!(", {} should be a first choice", inst.house_label(*h)),
                (None, Some((a, h))) => {
                    s += &format!(
                        ", pair {} {} blocks a larger one",
                        inst.agent_label(*a),
                        inst.house_label(*h)
                    )
                }
                (None, None) => {}
            }
            s
        }
        HatViolation::OutsideFirstAndSecond { agent, house } => {
            format!(
                "{} holds {}, neither f nor s",
                inst.agent_label(*agent),
                inst.house_label(*house)
            )
        }
    }
}

fn describe_cha(inst: &Instance, v: &ChaViolation) -> String {
    match v {
        ChaViolation::Unmatched(a) => format!("{} is unmatched", inst.agent_label(*a)),
        ChaViolation::FirstChoiceQuota { house, expected, found } => format!(
            "{} holds {found} of its first-choice agents, expected {expected}",
            inst.house_label(*house)
        ),
        ChaViolation::OutsideFirstAndSecond { agent, house } => {
            format!(
                "{} holds {}, neither f nor s",
                inst.agent_label(*agent),
                inst.house_label(*house)
            )
        }
    }
}
