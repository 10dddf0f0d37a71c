//! Command-line arguments and their resolution into case parameters, a grid
//! and input fields.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use num_complex::Complex64;
use supergauss_core::cases::families::default_generator;
use supergauss_core::cases::{
    family, hyp_case1_family, liouville_solution, names, FamilyOptions, Holomorphic,
};
use supergauss_core::io::read_field_file;
use supergauss_core::{
    CaseSpec, CaseTag, ConformalGrid, Field, GeometryBundle, GridSpec, Tolerance,
};

pub const DEFAULT_N: usize = 101;
pub const DEFAULT_H0: f64 = 1.5;

/// Case, parameters, grid and field sources shared by all commands.
#[derive(Debug, Clone, Args)]
pub struct CaseArgs {
    /// Case tag (euc-f0, euc-f2, euc-f3-c1, euc-f3-c2, cur-f0, cur-f2,
    /// hyp-f3-c1, hyp-f3-c2).
    #[arg(long)]
    pub case: Option<String>,
    /// Read case and fields from a bundle manifest (or its directory).
    #[arg(long, value_name = "PATH")]
    pub bundle: Option<PathBuf>,

    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Real, or complex as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Real, or complex as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// σ of the Liouville solution (hyp-f3-c1); must match the parameters.
    #[arg(long)]
    pub sigma: Option<f64>,

    /// Grid as `n,half-width` or `n,half-width,s0,t0`.
    #[arg(long, value_name = "N,HW")]
    pub grid: Option<String>,
    /// Max-norm tolerance (default 50h²).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Field sources: plane, liouville, identity, const:v, const:re,im,
    /// linear:a,b or a CSV path.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// q (ω-scaled cases) or Q.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Conjugate of q; derived when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub qbar: Option<String>,
    /// h (ω-scaled cases) or H.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    /// Holomorphic generator for Liouville presets: identity, scaled:s,
    /// poly:c0;c1;… (entries real or `re,im`) or exp:a.
    #[arg(long = "f", value_name = "GENERATOR", allow_hyphen_values = true)]
    pub generator: Option<String>,
}

/// Fully resolved run input.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: CaseSpec,
    pub grid: Arc<ConformalGrid>,
    pub tol: Option<Tolerance>,
    pub seed: u64,
    pub bundle: GeometryBundle,
    /// Whether the inputs can be regenerated at another resolution.
    pub regenerable: bool,
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<f64>()
            .with_context(|| format!("invalid number `{p}`"))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => bail!("expected `re` or `re,im`, got `{s}`"),
    }
}

fn parse_real(s: &str, name: &str) -> Result<f64> {
    let z = parse_complex(s)?;
    if z.im != 0.0 {
        bail!("--{name} is real for this case, got `{s}`");
    }
    Ok(z.re)
}

pub fn parse_grid(s: Option<&str>) -> Result<GridSpec> {
    let Some(s) = s else {
        return Ok(GridSpec {
            n: DEFAULT_N,
            ..GridSpec::default()
        });
    };
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let f = |p: &str| {
        p.parse::<f64>()
            .with_context(|| format!("invalid grid value `{p}`"))
    };
    let n: usize = parts[0]
        .parse()
        .with_context(|| format!("invalid grid size `{}`", parts[0]))?;
    if n < 9 {
        bail!("grid needs n ≥ 9, got {n}");
    }
    let (hw, center) = match parts.as_slice() {
        [_] => (1.0, [0.0, 0.0]),
        [_, hw] => (f(hw)?, [0.0, 0.0]),
        [_, hw, s0, t0] => (f(hw)?, [f(s0)?, f(t0)?]),
        _ => bail!("--grid expects n,half-width or n,half-width,s0,t0"),
    };
    Ok(GridSpec {
        center,
        half_width: hw,
        n,
    })
}

pub fn parse_generator(s: &str) -> Result<Holomorphic> {
    if s == "identity" {
        return Ok(Holomorphic::identity());
    }
    if let Some(v) = s.strip_prefix("scaled:") {
        return Ok(Holomorphic::scaled(v.trim().parse().context("scaled:s")?));
    }
    if let Some(v) = s.strip_prefix("poly:") {
        let coeffs = v
            .split(';')
            .map(parse_complex)
            .collect::<Result<Vec<_>>>()?;
        return Ok(Holomorphic::Poly(coeffs));
    }
    if let Some(v) = s.strip_prefix("exp:") {
        return Ok(Holomorphic::Exp {
            a: parse_complex(v)?,
        });
    }
    bail!("unknown generator `{s}` (identity, scaled:s, poly:c0;c1;…, exp:a)")
}

impl CaseArgs {
    fn tag(&self) -> Result<CaseTag> {
        let name = self
            .case
            .as_deref()
            .ok_or_else(|| anyhow!("--case is required"))?;
        Ok(name.parse::<CaseTag>()?)
    }

    /// Case parameters: defaults overridden by flags; flags foreign to the
    /// case are rejected.
    pub fn spec(&self) -> Result<CaseSpec> {
        let tag = self.tag()?;
        let mut spec = CaseSpec::default_for(tag);
        let mut used: Vec<&str> = Vec::new();
        match &mut spec {
            CaseSpec::EucF0 => {}
            CaseSpec::EucF2 { a, b, k } => {
                set(a, self.a, "a", &mut used);
                set(b, self.b, "b", &mut used);
                set(k, self.k, "k", &mut used);
            }
            CaseSpec::EucF3C1 { alpha, gamma, k } => {
                if let Some(s) = &self.alpha {
                    *alpha = parse_complex(s)?;
                    used.push("alpha");
                }
                set(gamma, self.gamma, "gamma", &mut used);
                set(k, self.k, "k", &mut used);
            }
            CaseSpec::EucF3C2 { alpha, beta, gamma } => {
                if let Some(s) = &self.alpha {
                    *alpha = parse_real(s, "alpha")?;
                    used.push("alpha");
                }
                if let Some(s) = &self.beta {
                    *beta = parse_complex(s)?;
                    used.push("beta");
                }
                set(gamma, self.gamma, "gamma", &mut used);
            }
            CaseSpec::CurF0 { c } | CaseSpec::CurF2 { c } => set(c, self.c, "c", &mut used),
            CaseSpec::HypF3C1 {
                alpha,
                beta,
                gamma,
                k,
                c,
                eps,
            } => {
                if let Some(s) = &self.alpha {
                    *alpha = parse_real(s, "alpha")?;
                    used.push("alpha");
                }
                if let Some(s) = &self.beta {
                    *beta = parse_complex(s)?;
                    used.push("beta");
                }
                set(gamma, self.gamma, "gamma", &mut used);
                set(k, self.k, "k", &mut used);
                set(c, self.c, "c", &mut used);
                set(eps, self.eps, "eps", &mut used);
            }
            CaseSpec::HypF3C2 { c, eps } => {
                set(c, self.c, "c", &mut used);
                set(eps, self.eps, "eps", &mut used);
            }
        }
        let given = [
            ("a", self.a.is_some()),
            ("b", self.b.is_some()),
            ("k", self.k.is_some()),
            ("alpha", self.alpha.is_some()),
            ("beta", self.beta.is_some()),
            ("gamma", self.gamma.is_some()),
            ("c", self.c.is_some()),
            ("eps", self.eps.is_some()),
        ];
        for (name, present) in given {
            if present && !used.contains(&name) {
                bail!("parameter --{name} does not apply to case {}", tag.name());
            }
        }
        if self.sigma.is_some() && tag != CaseTag::HypF3C1 {
            bail!("--sigma applies to hyp-f3-c1 only");
        }
        Ok(spec)
    }

    pub fn tolerance(&self) -> Result<Option<Tolerance>> {
        match self.tol {
            Some(t) if !(t > 0.0 && t.is_finite()) => bail!("--tol must be positive, got {t}"),
            Some(t) => Ok(Some(Tolerance::with_max(t))),
            None => Ok(None),
        }
    }

    fn has_field_flags(&self) -> bool {
        [&self.u, &self.q, &self.qbar, &self.h, &self.phi, &self.psi]
            .iter()
            .any(|f| f.is_some())
    }

    /// Resolves everything; reads a bundle when `--bundle` is given.
    pub fn resolve(&self) -> Result<RunConfig> {
        if let Some(path) = &self.bundle {
            if self.case.is_some() || self.has_field_flags() || self.grid.is_some() {
                bail!("--bundle carries case, grid and fields; drop --case/--grid/field flags");
            }
            let (spec, bundle) = supergauss_core::io::read_bundle(path)?;
            let grid = Arc::clone(bundle.grid()?);
            return Ok(RunConfig {
                spec,
                grid,
                tol: self.tolerance()?,
                seed: self.seed,
                bundle,
                regenerable: false,
            });
        }
        let spec = self.spec()?;
        let grid = Arc::new(ConformalGrid::from_spec(parse_grid(self.grid.as_deref())?)?);
        let bundle = self.inputs(&spec, &grid)?;
        let regenerable = [&self.u, &self.q, &self.qbar, &self.h, &self.phi, &self.psi]
            .iter()
            .all(|f| f.as_deref().map_or(true, is_preset));
        Ok(RunConfig {
            spec,
            grid,
            tol: self.tolerance()?,
            seed: self.seed,
            bundle,
            regenerable,
        })
    }

    fn h0(&self) -> Result<f64> {
        match self.h.as_deref() {
            Some(s) if s.starts_with("const:") => parse_real(&s["const:".len()..], "h"),
            Some("plane") => Ok(0.0),
            _ if self.u.as_deref() == Some("plane") => Ok(0.0),
            _ => Ok(DEFAULT_H0),
        }
    }

    /// Input fields of `spec` on `grid`; unspecified inputs follow the
    /// closed-form family.
    pub fn inputs(&self, spec: &CaseSpec, grid: &Arc<ConformalGrid>) -> Result<GeometryBundle> {
        let h0 = self.h0()?;
        let k_const = spec.liouville_constant(h0);
        let generator = match &self.generator {
            Some(s) => Some(parse_generator(s)?),
            None => None,
        };
        if !self.has_field_flags() {
            if let (CaseSpec::HypF3C1 { .. }, Some(_)) = (spec, self.sigma) {
                let f = generator
                    .clone()
                    .unwrap_or_else(|| default_generator(k_const));
                return Ok(hyp_case1_family(spec, grid, &f, self.sigma)?);
            }
            let opts = FamilyOptions {
                f: generator,
                h0,
                psi0: 0.0,
            };
            return Ok(family(spec, grid, &opts)?);
        }
        let f = generator.unwrap_or_else(|| default_generator(k_const));
        let liouville = |role: &str| -> Result<Field> {
            match spec {
                CaseSpec::HypF3C1 { .. } if role == names::U => {
                    let b = hyp_case1_family(spec, grid, &f, self.sigma)?;
                    Ok(b.get(names::U)?.clone())
                }
                CaseSpec::HypF3C2 { .. } if role == names::PHI => {
                    Ok(liouville_solution(grid, &f, 0.0)?)
                }
                _ if role == names::U => Ok(liouville_solution(grid, &f, k_const)?),
                _ => bail!("preset `liouville` applies to u (or φ for hyp-f3-c2), not {role}"),
            }
        };
        let load = |role: &str, src: Option<&str>, default: &str| -> Result<Field> {
            let src = src.unwrap_or(default);
            field_source(src, role, grid, &liouville)
                .with_context(|| format!("field {role} from `{src}`"))
        };
        let plane = self.u.as_deref() == Some("plane");
        let h_default = if plane {
            "const:0".to_string()
        } else {
            format!("const:{h0}")
        };
        let mut b = GeometryBundle::new();
        let allowed: &[&str] = match spec.tag() {
            CaseTag::HypF3C1 => &["u"],
            CaseTag::HypF3C2 => &["phi", "psi"],
            _ => &["u", "q", "qbar", "h"],
        };
        for (flag, present) in [
            ("u", self.u.is_some()),
            ("q", self.q.is_some()),
            ("qbar", self.qbar.is_some()),
            ("h", self.h.is_some()),
            ("phi", self.phi.is_some()),
            ("psi", self.psi.is_some()),
        ] {
            if present && !allowed.contains(&flag) {
                bail!(
                    "field --{flag} is not an input of case {}",
                    spec.tag().name()
                );
            }
        }
        let scaled = matches!(spec.tag(), CaseTag::EucF2 | CaseTag::EucF3C1);
        let (qn, qbn, hn) = if scaled {
            (names::Q_SMALL, names::QBAR_SMALL, names::H_SMALL)
        } else {
            (names::Q, names::QBAR, names::H)
        };
        match spec.tag() {
            CaseTag::HypF3C1 => {
                b.insert(names::U, load(names::U, self.u.as_deref(), "liouville")?);
            }
            CaseTag::HypF3C2 => {
                b.insert(
                    names::PHI,
                    load(names::PHI, self.phi.as_deref(), "liouville")?,
                );
                b.insert(
                    names::PSI,
                    load(names::PSI, self.psi.as_deref(), "const:0")?,
                );
            }
            _ => {
                b.insert(names::U, load(names::U, self.u.as_deref(), "liouville")?);
                b.insert(qn, load(qn, self.q.as_deref(), "const:0")?);
                if let Some(s) = self.qbar.as_deref() {
                    b.insert(qbn, load(qbn, Some(s), "")?);
                }
                b.insert(hn, load(hn, self.h.as_deref(), &h_default)?);
            }
        }
        Ok(b)
    }

    /// The same inputs on another grid of the same domain.
    pub fn inputs_at(
        &self,
        spec: &CaseSpec,
        grid: &ConformalGrid,
        n: usize,
    ) -> Result<GeometryBundle> {
        let coarse = Arc::new(grid.with_resolution(n)?);
        self.inputs(spec, &coarse)
    }
}

fn set(slot: &mut f64, v: Option<f64>, name: &'static str, used: &mut Vec<&'static str>) {
    if let Some(v) = v {
        *slot = v;
        used.push(name);
    }
}

fn is_preset(s: &str) -> bool {
    matches!(s, "plane" | "liouville" | "identity")
        || s.starts_with("const:")
        || s.starts_with("linear:")
}

fn field_source<L>(src: &str, role: &str, grid: &Arc<ConformalGrid>, liouville: &L) -> Result<Field>
where
    L: Fn(&str) -> Result<Field>,
{
    match src {
        "plane" => Ok(Field::zeros(grid)),
        "liouville" => liouville(role),
        "identity" => Ok(Field::from_fn(grid, |x| x)),
        _ => {
            if let Some(v) = src.strip_prefix("const:") {
                return Ok(Field::constant(grid, parse_complex(v)?));
            }
            if let Some(v) = src.strip_prefix("linear:") {
                let ab = parse_complex(v)?;
                return Ok(Field::from_fn(grid, |x| {
                    Complex64::new(ab.re * x.re + ab.im * x.im, 0.0)
                }));
            }
            let path = Path::new(src);
            if !path.exists() {
                bail!("`{src}` is neither a preset nor an existing CSV file");
            }
            Ok(read_field_file(path, grid)?)
        }
    }
}
