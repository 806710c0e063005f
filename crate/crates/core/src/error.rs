use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("srid mismatch: expected {expected}, found {found}")]
    SridMismatch { expected: i32, found: i32 },

    #[error("projection undefined at latitude {lat}")]
    ProjectionUndefined { lat: f64 },

    #[error("geoid model unavailable: {0}")]
    ModelUnavailable(String),

    #[error("bearing undefined between coincident points")]
    UndefinedBearing,

    #[error("xml parse error at line {line}: {message}")]
    Xml { line: usize, message: String },

    #[error("way {way_id} references missing node(s) {missing:?}")]
    DanglingReference { way_id: i64, missing: Vec<i64> },

    #[error("wkt parse error at byte {offset}: {message}")]
    Wkt { offset: usize, message: String },

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config { key: String, line: usize, message: String },

    #[error("uav line error in field {field}: {message}")]
    UavLine { field: usize, message: String },

    #[error("invalid raster extent: {0}")]
    InvalidExtent(String),

    #[error("raster layers differ in size or extent")]
    LayerMismatch,

    #[error("png encoding failed: {0}")]
    Png(String),
}
