use std::fmt::Write as _;
use std::path::PathBuf;

use crate::coefficient::CoefficientKind;
use crate::error::{LodError, Result};

/// Right-hand side of the model problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rhs {
    /// `f(x, y) = x`.
    X,
    /// `f ≡ 1`.
    One,
    /// `f = 2π² sin(πx) sin(πy)`, whose solution for `A ≡ 1` is `sin(πx) sin(πy)`.
    Manufactured,
    Zero,
}

impl Rhs {
    pub fn name(self) -> &'static str {
        match self {
            Rhs::X => "x",
            Rhs::One => "one",
            Rhs::Manufactured => "manufactured",
            Rhs::Zero => "zero",
        }
    }

    pub fn eval(self, x: f64, y: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Rhs::X => x,
            Rhs::One => 1.0,
            Rhs::Manufactured => 2.0 * PI * PI * (PI * x).sin() * (PI * y).sin(),
            Rhs::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Global,
    /// Patch-localized correctors, Galerkin solve.
    Localized,
    /// Patch-localized correctors, Petrov–Galerkin solve.
    Petrov,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Global => "global",
            Mode::Localized => "localized",
            Mode::Petrov => "petrov",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Desk,
    Paper,
}

/// Coarse node whose corrector a decay study measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSelector {
    /// Interior coarse node nearest to `(0.5, 0.5)`.
    Center,
    /// Coarse interior dof index.
    Index(usize),
}

/// Everything an experiment needs.
///
/// The text form is one `key = value` per line, `#` starts a comment and
/// lists are comma separated:
///
/// ```text
/// fine_n = 64
/// coarse_n = 4, 8, 16
/// levels = 1, 2, 3
/// coefficient = checkerboard
/// cell = 32
/// contrast = 1000
/// seed = 1
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub fine_n: usize,
    pub coarse_n: Vec<usize>,
    /// Patch orders `l`.
    pub levels: Vec<usize>,
    pub coefficient: CoefficientKind,
    pub rhs: Rhs,
    pub tol: f64,
    pub mode: Mode,
    pub out: Option<PathBuf>,
    /// Record wall times in CSV output. Off by default so files stay
    /// byte-reproducible.
    pub timing: bool,
    pub decay_node: NodeSelector,
    /// Largest radius of a decay study in coarse grid spacings; `0` runs up
    /// to the domain diameter.
    pub decay_max_multiple: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::preset(Preset::Desk)
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let (fine_n, coarse_n) = match preset {
            Preset::Desk => (64, vec![4, 8, 16]),
            Preset::Paper => (256, vec![8, 16, 32, 64]),
        };
        ExperimentConfig {
            fine_n,
            coarse_n,
            levels: vec![1, 2, 3],
            coefficient: CoefficientKind::Checkerboard { cell: 32, contrast: 1000.0, seed: 1 },
            rhs: Rhs::X,
            tol: 1e-10,
            mode: Mode::Localized,
            out: None,
            timing: false,
            decay_node: NodeSelector::Center,
            decay_max_multiple: 0,
        }
    }

    /// Parses a config on top of the desk preset.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_onto(Self::default(), text)
    }

    /// Parses a config; keys that are absent keep their value from `base`.
    pub fn parse_onto(base: Self, text: &str) -> Result<Self> {
        let mut cfg = base;
        let mut kind = KindFields::from(cfg.coefficient);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                LodError::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "fine_n" => cfg.fine_n = parse_num(key, value)?,
                "coarse_n" => cfg.coarse_n = parse_list(key, value)?,
                "levels" => cfg.levels = parse_list(key, value)?,
                "coefficient" => kind.name = value.to_string(),
                "value" => kind.value = parse_num(key, value)?,
                "epsilon" => kind.epsilon = parse_num(key, value)?,
                "amplitude" => kind.amplitude = parse_num(key, value)?,
                "cell" => kind.cell = parse_num(key, value)?,
                "contrast" => kind.contrast = parse_num(key, value)?,
                "seed" => kind.seed = parse_num(key, value)?,
                "rhs" => {
                    cfg.rhs = match value {
                        "x" => Rhs::X,
                        "one" => Rhs::One,
                        "manufactured" => Rhs::Manufactured,
                        "zero" => Rhs::Zero,
                        _ => return Err(LodError::config(key, format!("unknown rhs `{value}` (x, one, manufactured, zero)"))),
                    }
                }
                "tol" => cfg.tol = parse_num(key, value)?,
                "mode" => {
                    cfg.mode = match value {
                        "global" => Mode::Global,
                        "localized" => Mode::Localized,
                        "petrov" => Mode::Petrov,
                        _ => return Err(LodError::config(key, format!("unknown mode `{value}` (global, localized, petrov)"))),
                    }
                }
                "out" => cfg.out = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
                "timing" => cfg.timing = parse_num(key, value)?,
                "decay_node" => {
                    cfg.decay_node = if value == "center" {
                        NodeSelector::Center
                    } else {
                        NodeSelector::Index(parse_num(key, value)?)
                    }
                }
                "decay_max_multiple" => cfg.decay_max_multiple = parse_num(key, value)?,
                _ => return Err(LodError::config(key, "unknown key")),
            }
        }
        cfg.coefficient = kind.build()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Text form accepted by [`ExperimentConfig::parse`].
    pub fn serialize(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "fine_n = {}", self.fine_n);
        let _ = writeln!(s, "coarse_n = {}", join(&self.coarse_n));
        let _ = writeln!(s, "levels = {}", join(&self.levels));
        match self.coefficient {
            CoefficientKind::Constant { value } => {
                let _ = writeln!(s, "coefficient = constant\nvalue = {value:?}");
            }
            CoefficientKind::Periodic { epsilon, amplitude } => {
                let _ = writeln!(s, "coefficient = periodic\nepsilon = {epsilon:?}\namplitude = {amplitude:?}");
            }
            CoefficientKind::Checkerboard { cell, contrast, seed } => {
                let _ = writeln!(s, "coefficient = checkerboard\ncell = {cell}\ncontrast = {contrast:?}\nseed = {seed}");
            }
        }
        let _ = writeln!(s, "rhs = {}", self.rhs.name());
        let _ = writeln!(s, "tol = {:?}", self.tol);
        let _ = writeln!(s, "mode = {}", self.mode.name());
        if let Some(out) = &self.out {
            let _ = writeln!(s, "out = {}", out.display());
        }
        let _ = writeln!(s, "timing = {}", self.timing);
        match self.decay_node {
            NodeSelector::Center => s.push_str("decay_node = center\n"),
            NodeSelector::Index(i) => {
                let _ = writeln!(s, "decay_node = {i}");
            }
        }
        let _ = writeln!(s, "decay_max_multiple = {}", self.decay_max_multiple);
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.fine_n < 2 {
            return Err(LodError::config("fine_n", format!("{} is below 2", self.fine_n)));
        }
        if self.coarse_n.is_empty() {
            return Err(LodError::config("coarse_n", "list is empty"));
        }
        for &n in &self.coarse_n {
            self.refinement_levels(n)?;
        }
        if self.mode != Mode::Global {
            if self.levels.is_empty() {
                return Err(LodError::config("levels", "list is empty"));
            }
            if let Some(&l) = self.levels.iter().find(|&&l| l == 0) {
                return Err(LodError::config("levels", format!("patch order {l} must be at least 1")));
            }
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(LodError::config("tol", format!("{} must be positive", self.tol)));
        }
        match self.coefficient {
            CoefficientKind::Constant { value } if !(value > 0.0 && value.is_finite()) => {
                return Err(LodError::config("value", format!("{value} must be positive")));
            }
            CoefficientKind::Periodic { epsilon, .. } if !(epsilon > 0.0 && epsilon <= 1.0) => {
                return Err(LodError::config("epsilon", format!("{epsilon} must lie in (0, 1]")));
            }
            CoefficientKind::Periodic { amplitude, .. } if !(amplitude > 1.0 && amplitude.is_finite()) => {
                return Err(LodError::config("amplitude", format!("{amplitude} must exceed 1")));
            }
            CoefficientKind::Checkerboard { cell, .. } if cell == 0 || self.fine_n % cell != 0 => {
                return Err(LodError::config("cell", format!("{cell} must divide fine_n = {}", self.fine_n)));
            }
            CoefficientKind::Checkerboard { contrast, .. } if !(contrast >= 1.0 && contrast.is_finite()) => {
                return Err(LodError::config("contrast", format!("{contrast} must be at least 1")));
            }
            _ => {}
        }
        Ok(())
    }

    /// Number of red refinements from `coarse_n` to `fine_n`.
    pub fn refinement_levels(&self, coarse_n: usize) -> Result<usize> {
        if coarse_n < 2 {
            return Err(LodError::config("coarse_n", format!("{coarse_n} is below 2")));
        }
        if self.fine_n % coarse_n != 0 || !(self.fine_n / coarse_n).is_power_of_two() || self.fine_n == coarse_n {
            return Err(LodError::config(
                "coarse_n",
                format!("fine_n = {} must be {coarse_n} times a power of two (at least 2)", self.fine_n),
            ));
        }
        Ok((self.fine_n / coarse_n).trailing_zeros() as usize)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| LodError::config(key, format!("cannot parse `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value.split(',').map(|v| parse_num(key, v.trim())).collect()
}

/// Coefficient keys collected independently of their order in the file.
struct KindFields {
    name: String,
    value: f64,
    epsilon: f64,
    amplitude: f64,
    cell: usize,
    contrast: f64,
    seed: u64,
}

impl From<CoefficientKind> for KindFields {
    fn from(kind: CoefficientKind) -> Self {
        let mut f = KindFields {
            name: String::new(),
            value: 1.0,
            epsilon: 1.0 / 16.0,
            amplitude: 2.0,
            cell: 32,
            contrast: 1000.0,
            seed: 1,
        };
        match kind {
            CoefficientKind::Constant { value } => {
                f.name = "constant".into();
                f.value = value;
            }
            CoefficientKind::Periodic { epsilon, amplitude } => {
                f.name = "periodic".into();
                f.epsilon = epsilon;
                f.amplitude = amplitude;
            }
            CoefficientKind::Checkerboard { cell, contrast, seed } => {
                f.name = "checkerboard".into();
                f.cell = cell;
                f.contrast = contrast;
                f.seed = seed;
            }
        }
        f
    }
}

impl KindFields {
    fn build(&self) -> Result<CoefficientKind> {
        Ok(match self.name.as_str() {
            "constant" => CoefficientKind::Constant { value: self.value },
            "periodic" => CoefficientKind::Periodic { epsilon: self.epsilon, amplitude: self.amplitude },
            "checkerboard" => CoefficientKind::Checkerboard { cell: self.cell, contrast: self.contrast, seed: self.seed },
            other => {
                return Err(LodError::config(
                    "coefficient",
                    format!("unknown kind `{other}` (constant, periodic, checkerboard)"),
                ))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        ExperimentConfig::preset(Preset::Desk).validate().unwrap();
        let paper = ExperimentConfig::preset(Preset::Paper);
        paper.validate().unwrap();
        assert_eq!(paper.coarse_n, vec![8, 16, 32, 64]);
    }

    #[test]
    fn parse_overrides_and_comments() {
        let cfg = ExperimentConfig::parse(
            "# periodic sweep\nfine_n = 32\ncoarse_n = 4, 8 # two levels\ncoefficient = periodic\nepsilon = 0.125\nmode = global\n",
        )
        .unwrap();
        assert_eq!(cfg.fine_n, 32);
        assert_eq!(cfg.coarse_n, vec![4, 8]);
        assert_eq!(cfg.coefficient, CoefficientKind::Periodic { epsilon: 0.125, amplitude: 2.0 });
        assert_eq!(cfg.mode, Mode::Global);
        assert_eq!(cfg.levels, vec![1, 2, 3]);
    }

    fn field_of(text: &str) -> String {
        match ExperimentConfig::parse(text) {
            Err(LodError::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of("coarse_n = 3"), "coarse_n");
        assert_eq!(field_of("coarse_n = 64"), "coarse_n");
        assert_eq!(field_of("tol = 0"), "tol");
        assert_eq!(field_of("tol = abc"), "tol");
        assert_eq!(field_of("levels = 0, 1"), "levels");
        assert_eq!(field_of("cell = 24"), "cell");
        assert_eq!(field_of("contrast = 0.5"), "contrast");
        assert_eq!(field_of("coefficient = periodic\namplitude = 1"), "amplitude");
        assert_eq!(field_of("coefficient = marble"), "coefficient");
        assert_eq!(field_of("rhs = y"), "rhs");
        assert_eq!(field_of("bogus = 1"), "bogus");
        assert_eq!(field_of("just words"), "line 1");
    }

    #[test]
    fn round_trip_of_presets() {
        for p in [Preset::Desk, Preset::Paper] {
            let mut cfg = ExperimentConfig::preset(p);
            cfg.out = Some("runs/a.csv".into());
            cfg.decay_node = NodeSelector::Index(7);
            assert_eq!(ExperimentConfig::parse(&cfg.serialize()).unwrap(), cfg);
        }
    }
}
