//! Observation-region grammar: the experiments observe the complement of
//! an open rectangle, so regions are named by what is removed.  All
//! regions include the nodes on their closure (the complements are closed
//! sets).

use std::fmt;
use std::str::FromStr;

use fracsource_core::Grid2D;

/// Observation region as the complement of an unobserved block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionSpec {
    /// Complement of the open square `(a, b)^2`: a boundary frame.
    Frame { a: f64, b: f64 },
    /// Complement of `[0, c)^2`: everything right of or above the corner
    /// block.
    Corner { c: f64 },
    /// Complement of `[0,1] x [0, c)`: the strip `y >= c`.
    Strip { c: f64 },
    /// The whole domain.
    All,
}

impl RegionSpec {
    /// Node indicator on the given grid, row-major like the fields.
    pub fn mask(&self, grid: Grid2D) -> Vec<bool> {
        let mut mask = Vec::with_capacity(grid.n_nodes());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = (grid.node_x(i), grid.node_y(j));
                mask.push(match *self {
                    RegionSpec::Frame { a, b } => !(x > a && x < b && y > a && y < b),
                    RegionSpec::Corner { c } => x >= c || y >= c,
                    RegionSpec::Strip { c } => y >= c,
                    RegionSpec::All => true,
                });
            }
        }
        mask
    }
}

impl fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RegionSpec::Frame { a, b } => write!(f, "frame({a},{b})"),
            RegionSpec::Corner { c } => write!(f, "corner({c})"),
            RegionSpec::Strip { c } => write!(f, "strip({c})"),
            RegionSpec::All => write!(f, "all"),
        }
    }
}

impl FromStr for RegionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "all" {
            return Ok(RegionSpec::All);
        }
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| format!("region '{s}' is not all/frame(a,b)/corner(c)/strip(c)"))?;
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| format!("region '{s}' misses the closing parenthesis"))?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|e| format!("region '{s}': {e}")))
            .collect::<Result<_, _>>()?;
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        match (name.trim(), nums.as_slice()) {
            ("frame", [a, b]) if unit(*a) && unit(*b) && a < b => {
                Ok(RegionSpec::Frame { a: *a, b: *b })
            }
            ("corner", [c]) if unit(*c) && *c > 0.0 => Ok(RegionSpec::Corner { c: *c }),
            ("strip", [c]) if unit(*c) && *c > 0.0 => Ok(RegionSpec::Strip { c: *c }),
            _ => Err(format!("region '{s}' has a bad shape or arguments outside (0,1)")),
        }
    }
}
