use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate direction")]
    DegenerateDirection,

    #[error("no supervisable pixels")]
    NoSupervisablePixels,

    #[error("no visible weighted samples")]
    NoVisibleSamples,

    #[error("degenerate correspondence set")]
    DegenerateCorrespondences,

    #[error("no consensus (best inlier count {best} < {required})")]
    NoConsensus { best: usize, required: usize },

    #[error("ego-motion failed between frames {frame} and {}: {source}", frame + 1)]
    EgoMotion {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient visibility")]
    InsufficientVisibility,

    #[error("no valid pixels")]
    NoValidPixels,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("zero-norm embedding")]
    ZeroNormEmbedding,

    #[error("camera is outside the room or inside the sphere at frame {0}")]
    CameraOutsideScene(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by the filesystem rather than by the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::EgoMotion { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
