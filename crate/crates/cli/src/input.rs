//! Loading algebra and upset inputs from JSON.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context};
use confcoh::exactalg::Ring;
use confcoh::partitions::{UpSet, UpSetSpec};
use confcoh::tcdga::{constant_tcdga, formal_tcdga, CdgaJson, FiniteCdga, FiniteTcdga, GradedModuleInput, TcdgaJson};
use serde_json::Value;

pub fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))
}

/// Accepts a tcdga (`components`), a cdga taken as a constant tcdga
/// (`basis`), or a graded module taken formally (`ranks`). The last two
/// are built up to arity `n`; `ring` overrides a graded module's ring.
pub fn load_algebra(path: &Path, n: usize, ring: Option<Ring>) -> anyhow::Result<Arc<FiniteTcdga>> {
    let v = read_json(path)?;
    let obj = v.as_object().context("algebra input must be a JSON object")?;
    let a = if obj.contains_key("components") {
        let j: TcdgaJson = serde_json::from_value(v).context("malformed tcdga input")?;
        FiniteTcdga::try_from(&j)?
    } else if obj.contains_key("ranks") {
        let mut h: GradedModuleInput = serde_json::from_value(v).context("malformed graded module input")?;
        if let Some(r) = ring {
            h.ring = r;
        }
        formal_tcdga(&h, n)?
    } else if obj.contains_key("basis") {
        let j: CdgaJson = serde_json::from_value(v).context("malformed cdga input")?;
        let c = FiniteCdga::try_from(&j)?;
        let rep = c.validate();
        if !rep.is_ok() {
            bail!("cdga fails validation: {}", serde_json::to_string(&rep.failures)?);
        }
        constant_tcdga(&c, n)?
    } else {
        bail!("algebra input needs one of the keys components, ranks or basis");
    };
    let rep = a.validate();
    if !rep.is_ok() {
        bail!("algebra fails validation: {}", serde_json::to_string(&rep.failures)?);
    }
    Ok(Arc::new(a))
}

/// `full`, `k-equals:K` or `file:PATH`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UpsetArg {
    Full,
    KEquals(usize),
    File(String),
}

impl std::str::FromStr for UpsetArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "full" {
            return Ok(UpsetArg::Full);
        }
        if let Some(k) = s.strip_prefix("k-equals:") {
            return k.parse().map(UpsetArg::KEquals).map_err(|_| format!("bad k in {s:?}"));
        }
        if let Some(p) = s.strip_prefix("file:") {
            return Ok(UpsetArg::File(p.to_string()));
        }
        Err(format!("expected full, k-equals:K or file:PATH, got {s:?}"))
    }
}

impl UpsetArg {
    /// Builds the upset; `n` may be omitted only for a file, which carries
    /// its own size.
    pub fn build(&self, n: Option<usize>) -> anyhow::Result<UpSet> {
        let u = match self {
            UpsetArg::Full => UpSet::full(n.context("--n is required")?)?,
            UpsetArg::KEquals(k) => UpSet::k_equals(n.context("--n is required")?, *k)?,
            UpsetArg::File(p) => {
                let spec: UpSetSpec = serde_json::from_value(read_json(Path::new(p))?).context("malformed upset file")?;
                let u = spec.build()?;
                if let Some(n) = n {
                    if n != u.n() {
                        bail!("upset file has n={}, but --n {n} was given", u.n());
                    }
                }
                u
            }
        };
        Ok(u)
    }
}
