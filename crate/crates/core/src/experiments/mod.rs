//! Parameter sweeps, analytic validation and SVG plots.

pub mod plot;
pub mod sweep;
pub mod validate;

use std::fmt;
use std::str::FromStr;

use crate::beamforming::AnMode;
use crate::channel::{ChannelDraw, LinkGeometry};
use crate::error::{Error, Result};
use crate::link::AccessScheme;
use crate::optimizer::OptContext;
use crate::params::SystemParams;

pub use plot::{plot, FigureKind};
pub use sweep::{run_sweep, write_sweep_csv, SweepRow, SweepSpec, SweepVar};
pub use validate::{validate_analytics, ValidationGrid, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pairing {
    Gpm,
    Rpm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    /// Exhaustive grid.
    Eg,
    Ga,
}

/// A sweep scheme `<gpm|rpm>-<noma|oma>[-an|-nan][-eg|-ga]`; AN and the
/// exhaustive solver are the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scheme {
    pub pairing: Pairing,
    pub access: AccessScheme,
    pub an: bool,
    pub solver: Solver,
}

impl Scheme {
    pub fn an_mode(&self) -> AnMode {
        if self.an {
            AnMode::Model
        } else {
            AnMode::Off
        }
    }

    /// Optimiser context for one pair and realisation. Without AN the
    /// secrecy constraint is not enforced: the edge vehicle's outage is then
    /// close to one for every `λ`, and the scheme serves as a secrecy
    /// reference with delay-optimal allocations.
    pub fn context(&self, params: &SystemParams, geometry: LinkGeometry, draw: &ChannelDraw) -> OptContext {
        let mut ctx = OptContext::from_draw(params, geometry, draw, self.access, self.an_mode());
        if !self.an {
            ctx.sop_tolerance = 1.0;
        }
        ctx
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown scheme `{s}`"));
        let lower = s.trim().to_ascii_lowercase();
        let mut parts = lower.split('-');
        let pairing = match parts.next() {
            Some("gpm") => Pairing::Gpm,
            Some("rpm") => Pairing::Rpm,
            _ => return Err(bad()),
        };
        let access = match parts.next() {
            Some("noma") => AccessScheme::Noma,
            Some("oma") => AccessScheme::Oma,
            _ => return Err(bad()),
        };
        let mut scheme = Scheme { pairing, access, an: true, solver: Solver::Eg };
        let (mut seen_an, mut seen_solver) = (false, false);
        for p in parts {
            match p {
                "an" | "nan" if !seen_an && !seen_solver => {
                    scheme.an = p == "an";
                    seen_an = true;
                }
                "eg" | "ga" if !seen_solver => {
                    scheme.solver = if p == "ga" { Solver::Ga } else { Solver::Eg };
                    seen_solver = true;
                }
                _ => return Err(bad()),
            }
        }
        Ok(scheme)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairing = match self.pairing {
            Pairing::Gpm => "gpm",
            Pairing::Rpm => "rpm",
        };
        let access = match self.access {
            AccessScheme::Noma => "noma",
            AccessScheme::Oma => "oma",
        };
        let an = if self.an { "an" } else { "nan" };
        let solver = match self.solver {
            Solver::Eg => "eg",
            Solver::Ga => "ga",
        };
        write!(f, "{pairing}-{access}-{an}-{solver}")
    }
}

/// Parses a comma-separated scheme list.
pub fn parse_schemes(list: &str) -> Result<Vec<Scheme>> {
    let v: Vec<Scheme> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::InvalidArgument("no schemes given".into()));
    }
    Ok(v)
}
