//! Test functions given as descriptors, e.g. `indicator center=0 radius=1`.

use orlicz_morrey::params::Descriptor;
use orlicz_morrey::{Ball, Grid, GridFunction};

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Zero,
    Constant { c: f64 },
    Indicator { center: f64, radius: f64 },
    Bump { center: f64, width: f64, amplitude: f64 },
    Wavelet { center: f64, width: f64, amplitude: f64 },
    LogAbs,
    /// `|x - center|^alpha`.
    PowerAbs { alpha: f64, center: f64 },
}

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let d = Descriptor::parse(text).map_err(|e| format!("function: {e}"))?;
        let only = |keys: &[&str]| d.expect_only(keys).map_err(|e| format!("function: {e}"));
        let get = |k: &str| d.get(k).map_err(|e| format!("function: {e}"));
        let spec = match d.family.as_str() {
            "zero" => {
                only(&[])?;
                FunctionSpec::Zero
            }
            "constant" => {
                only(&["c"])?;
                FunctionSpec::Constant { c: d.get_or("c", 1.0) }
            }
            "indicator" => {
                only(&["center", "radius"])?;
                let radius = get("radius")?;
                Ball::new(d.get_or("center", 0.0), radius).map_err(|e| format!("function: {e}"))?;
                FunctionSpec::Indicator {
                    center: d.get_or("center", 0.0),
                    radius,
                }
            }
            "bump" | "wavelet" => {
                only(&["center", "width", "amplitude"])?;
                let (center, width, amplitude) =
                    (d.get_or("center", 0.0), get("width")?, d.get_or("amplitude", 1.0));
                if !(width > 0.0) {
                    return Err(format!("function: width must be positive, got {width}"));
                }
                if d.family == "bump" {
                    FunctionSpec::Bump { center, width, amplitude }
                } else {
                    FunctionSpec::Wavelet { center, width, amplitude }
                }
            }
            "logabs" => {
                only(&[])?;
                FunctionSpec::LogAbs
            }
            "powerabs" => {
                only(&["alpha", "center"])?;
                FunctionSpec::PowerAbs {
                    alpha: get("alpha")?,
                    center: d.get_or("center", 0.0),
                }
            }
            other => return Err(format!("function: unknown family `{other}`")),
        };
        Ok(spec)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            FunctionSpec::Zero => 0.0,
            FunctionSpec::Constant { c } => c,
            FunctionSpec::Indicator { center, radius } => {
                if (x - center).abs() < radius {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionSpec::Bump { center, width, amplitude } => {
                let z = (x - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
            FunctionSpec::Wavelet { center, width, amplitude } => {
                let z = (x - center) / width;
                amplitude * (1.0 - z * z) * (-0.5 * z * z).exp()
            }
            FunctionSpec::LogAbs => x.abs().ln(),
            FunctionSpec::PowerAbs { alpha, center } => (x - center).abs().powf(alpha),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<GridFunction, String> {
        GridFunction::from_fn(*grid, |x| self.eval(x)).map_err(|e| format!("function: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families() {
        assert_eq!(
            FunctionSpec::parse("indicator radius=1").unwrap(),
            FunctionSpec::Indicator { center: 0.0, radius: 1.0 }
        );
        assert_eq!(FunctionSpec::parse("zero").unwrap(), FunctionSpec::Zero);
        assert!(FunctionSpec::parse("indicator radius=-1").is_err());
        assert!(FunctionSpec::parse("bump width=0").is_err());
        assert!(FunctionSpec::parse("bump width=1 height=2").is_err());
        assert!(FunctionSpec::parse("spline").is_err());
    }

    #[test]
    fn indicator_samples_open_ball() {
        let g = Grid::new(-2.0, 2.0, 4).unwrap();
        let f = FunctionSpec::parse("indicator center=0 radius=1").unwrap().sample(&g).unwrap();
        assert_eq!(f.values(), &[0.0, 1.0, 1.0, 0.0]);
    }
}
