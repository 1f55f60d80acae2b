// SPDX-License-Identifier: Apache-2.0

//! Crate-level error with a module name and a stable code per variant.

use thiserror::Error;

use crate::decompose::DecomposeError;
use crate::emit::ParseError;
use crate::ir::IrError;
use crate::map::MapError;
use crate::optimize::OptimizeError;
use crate::platform::PlatformError;
use crate::schedule::ScheduleError;
use crate::sim::SimError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ir: {0}")]
    Ir(#[from] IrError),
    #[error("platform: {0}")]
    Platform(#[from] PlatformError),
    #[error("decompose: {0}")]
    Decompose(#[from] DecomposeError),
    #[error("optimize: {0}")]
    Optimize(#[from] OptimizeError),
    #[error("schedule: {0}")]
    Schedule(#[from] ScheduleError),
    #[error("map: {0}")]
    Map(#[from] MapError),
    #[error("emit: {0}")]
    Parse(#[from] ParseError),
    #[error("sim: {0}")]
    Sim(#[from] SimError),
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Self::Ir(_) => "ir",
            Self::Platform(_) => "platform",
            Self::Decompose(_) => "decompose",
            Self::Optimize(_) => "optimize",
            Self::Schedule(_) => "schedule",
            Self::Map(_) => "map",
            Self::Parse(_) => "emit",
            Self::Sim(_) => "sim",
        }
    }

    /// Stable identifier, e.g. `MAP-DisconnectedTopology`.
    pub fn code(&self) -> String {
        let variant = match self {
            Self::Ir(e) => variant_name(e),
            Self::Platform(e) => variant_name(e),
            Self::Decompose(e) => variant_name(e),
            Self::Optimize(e) => variant_name(e),
            Self::Schedule(e) => variant_name(e),
            Self::Map(e) => variant_name(e),
            Self::Parse(_) => "Syntax".to_string(),
            Self::Sim(e) => variant_name(e),
        };
        format!("{}-{variant}", self.module().to_ascii_uppercase())
    }
}

/// Leading identifier of the `Debug` form, which is the variant name.
fn variant_name(e: &impl std::fmt::Debug) -> String {
    format!("{e:?}")
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect()
}
