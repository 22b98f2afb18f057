//! Harmonic maps into affine actions of groups, random walks on groups and
//! graphs, and spectral fixed-point criteria.

// `!(x >= 0.0)` style checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod fixtures;
pub mod gmodel;
pub mod graph;
pub mod group;
pub mod harmonic;
pub mod input;
pub mod linalg;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod suite;

pub use affine::{AffineAction, AffineMap, BoundKind};
pub use group::{Element, GroupContext, GroupError, Token, WalkMeasure};
pub use graph::{Graph, GraphError};
pub use harmonic::{EquivariantMap, HarmonicError};
pub use linalg::{Matrix, Vector};
pub use gmodel::{GModelError, LabelledGraph, SLabelling};
pub use report::{ReportError, RunReport};
pub use spectral::{LinkGraph, SpectralError};

use thiserror::Error;

/// Any failure of a library operation.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Action(#[from] affine::ActionError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    GModel(#[from] GModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Input(#[from] input::InputError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl Error {
    /// Short machine-readable code naming the failing module.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Group(_) => "group",
            Error::Action(_) => "action",
            Error::Harmonic(_) => "harmonic",
            Error::Graph(_) => "graph",
            Error::GModel(_) => "gmodel",
            Error::Spectral(_) => "spectral",
            Error::Input(_) => "input",
            Error::Report(_) => "report",
        }
    }
}
