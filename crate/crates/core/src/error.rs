use thiserror::Error;

use crate::actuation::ActuationError;
use crate::analysis::AnalysisError;
use crate::csv_io::CsvError;
use crate::kinematics::KinematicsError;
use crate::model::ModelError;
use crate::muscle::MuscleError;
use crate::thermal::ThermalError;

/// Crate-level error, wrapping the per-module error types.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Muscle(#[from] MuscleError),
    #[error(transparent)]
    Actuation(#[from] ActuationError),
    #[error(transparent)]
    Thermal(#[from] ThermalError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
