//! Output formatting and flag parsing helpers.

use favgame_core::scalar::Scalar;
use favgame_core::Caps;

use crate::Failure;

/// Decimal with 12 significant digits (the curve CSV format).
pub fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0.00000000000".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (11 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Parses a slowdown-factor flag: integer, decimal, or "p/q"; must be ≥ 1.
pub fn parse_s(raw: &str) -> Result<Scalar, Failure> {
    let s: Scalar = raw
        .parse()
        .map_err(|e| Failure::Usage(format!("invalid s value `{raw}`: {e}")))?;
    if s < Scalar::one() {
        return Err(Failure::Usage(format!(
            "slowdown factor must be ≥ 1, got {s}"
        )));
    }
    Ok(s)
}

/// Default caps, with FAVGAME_JOB_CAP overriding the enumeration limit
/// (and the coalition limit with it).
pub fn caps_from_env() -> Result<Caps, Failure> {
    match std::env::var("FAVGAME_JOB_CAP") {
        Err(_) => Ok(Caps::default()),
        Ok(raw) => {
            let cap: usize = raw.parse().map_err(|_| {
                Failure::Usage(format!("FAVGAME_JOB_CAP must be an integer, got `{raw}`"))
            })?;
            Ok(Caps::uniform(cap))
        }
    }
}
