use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("birth year {year}, line {line}: {msg}")]
    Parse { year: i32, line: usize, msg: String },

    #[error("corpus integrity, birth year {year}, line {line}: {msg}")]
    Integrity { year: i32, line: usize, msg: String },

    #[error("no SSA sources supplied")]
    EmptyCorpus,

    #[error("birth year {0} supplied more than once")]
    DuplicateYear(i32),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("none of the {size} labeled authors resolve in the corpus at year shift {shift}")]
    NoResolvableAuthors { shift: i32, size: usize },

    #[error("quadratic fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("series is invalid: {0}")]
    InvalidSeries(String),

    #[error("constant series with non-zero residuals; R² undefined")]
    Degenerate,

    #[error("missing group-year observations: {}", format_gaps(.0))]
    CoverageGaps(Vec<(String, i32)>),

    #[error("override file line {line}: {msg}")]
    Override { line: usize, msg: String },

    #[error("labeled subgroup line {line}: {msg}")]
    Labeled { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_gaps(gaps: &[(String, i32)]) -> String {
    gaps.iter()
        .map(|(g, y)| format!("({g}, {y})"))
        .collect::<Vec<_>>()
        .join(", ")
}
