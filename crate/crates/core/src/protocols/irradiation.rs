use num_complex::Complex64;

use super::ev::{ev_report, ev_single_shot};
use super::zeno::{zeno_ifm, ZenoConfig};
use crate::error::{IfmError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IrradiationProtocol {
    BombTest { reflectivity: f64 },
    Zeno { cycles: usize },
}

/// Absorbed probability per informative detection for an object with
/// transmission amplitude `object_t`.
pub fn irradiation_metric(protocol: IrradiationProtocol, object_t: Complex64) -> Result<f64> {
    if object_t.norm() >= 1.0 - 1e-15 {
        return Err(IfmError::IrradiationUndefined(
            "a fully transparent object absorbs nothing and is never detected".into(),
        ));
    }
    let report = match protocol {
        IrradiationProtocol::BombTest { reflectivity } => {
            ev_report(&ev_single_shot(reflectivity, Some(object_t))?)?
        }
        IrradiationProtocol::Zeno { cycles } => {
            zeno_ifm(&ZenoConfig::new(cycles).with_object(object_t))?.report
        }
    };
    if report.p_success <= 0.0 {
        return Err(IfmError::IrradiationUndefined(
            "informative outcome has zero probability".into(),
        ));
    }
    Ok(report.p_explosion / report.p_success)
}
