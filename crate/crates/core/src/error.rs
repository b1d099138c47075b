use alloc::string::String;

use crate::instance::Kind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("labels must be nonempty")]
    EmptyLabel,
    #[error("duplicate agent `{0}`")]
    DuplicateAgent(String),
    #[error("duplicate house `{0}`")]
    DuplicateHouse(String),
    #[error("house label `{0}` uses the reserved last-resort prefix `l(`")]
    ReservedLabel(String),
    #[error("house `{house}` has invalid capacity {capacity}")]
    BadCapacity { house: String, capacity: u32 },
    #[error("agent `{agent}` lists unknown house `{house}`")]
    UnknownHouse { agent: String, house: String },
    #[error("agent `{agent}` lists house `{house}` more than once")]
    DuplicateInList { agent: String, house: String },
    #[error("agent `{agent}` has an empty rank group")]
    EmptyGroup { agent: String },
    #[error("preferences given for unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("agent `{agent}` has a tie, which a {kind} instance does not allow")]
    TieNotAllowed { agent: String, kind: Kind },
    #[error("house `{house}` has capacity {capacity}, but a {kind} instance needs unit capacities")]
    CapacityNotAllowed { house: String, capacity: u32, kind: Kind },
    #[error("instance kind {found} given where {expected} is required")]
    WrongKind { expected: &'static str, found: Kind },
    #[error("last-resort houses have already been added")]
    LastResortsAlreadyAdded,
    #[error("last-resort houses must be added first")]
    LastResortsMissing,
    #[error("preference lists contain ties")]
    TiesPresent,
    #[error("agent `{0}` has an empty preference list")]
    EmptyPreferenceList(String),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("matching is not popular: {0}")]
    NotPopular(String),
    #[error("vertex index {index} out of range ({bound} vertices on that side)")]
    VertexOutOfRange { index: usize, bound: usize },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("matching is not maximum: an augmenting path exists")]
    NotMaximum,
    #[error(
        "agent `{agent}` does not rank house `{house}`; counting requires complete preference lists \
         (the dummy count is only guaranteed non-negative for complete lists)"
    )]
    IncompleteLists { agent: String, house: String },
    #[error("reduced graph is unbalanced: {agents} agents but only {houses} usable houses")]
    Unbalanced { agents: usize, houses: usize },
    #[error("bipartite graph is not square ({left} x {right})")]
    NotSquare { left: usize, right: usize },
    #[error("graph side of size {size} exceeds the limit of {limit}")]
    SizeLimit { size: usize, limit: usize },
    #[error("enumeration needs up to {states} states, above the limit of {limit}")]
    OracleLimit { states: u128, limit: u64 },
    #[error("parameter {name} = {value} is outside (0, 1)")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("switching graphs do not share the same underlying graph: {0}")]
    GraphMismatch(String),
    #[error("invalid switching set: {0}")]
    InvalidSwitchingSet(String),
    #[error("agent `{0}` has no admissible second choice")]
    MissingSecondChoice(String),
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("internal consistency failure: {0}")]
    Internal(String),
}
