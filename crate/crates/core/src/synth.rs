//! Complete multipliers: operand inputs, method selection and naming.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::blocks::BlockCensus;
use crate::error::{invariant, SynthError};
use crate::karatsuba::{self, KaratsubaOptions, MIN_KARATSUBA_BITS};
use crate::netlist::{Netlist, NetlistBuilder, WireRef};
use crate::school;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    School,
    Karatsuba,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::School => "school",
            Method::Karatsuba => "karatsuba",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "school" => Ok(Method::School),
            "karatsuba" => Ok(Method::Karatsuba),
            other => Err(SynthError::Domain(format!("unknown method `{other}`"))),
        }
    }
}

/// The method the recursion uses for an `m`-bit product.
pub fn method_policy(m: usize) -> Method {
    if karatsuba::karatsuba_preferred(m) {
        Method::Karatsuba
    } else {
        Method::School
    }
}

/// Gate count of the policy-driven construction for `m` bits.
pub fn predict_count(m: usize, sharing: bool) -> usize {
    let mut memo = vec![0usize; m + 1];
    for k in 1..=m {
        memo[k] = match method_policy(k) {
            Method::School => school::predict_school_count(k),
            Method::Karatsuba => {
                let n = k.div_ceil(2);
                memo[n + 1] + memo[k - n] + memo[n] + karatsuba::predict_overhead(k, sharing)
            }
        };
    }
    memo[m]
}

/// A generated multiplier with its bookkeeping.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub bits: usize,
    pub method: Method,
    /// Method tree, e.g. `karatsuba(16)→school(9,8,8)`.
    pub trace: String,
    pub netlist: Netlist,
    pub census: BlockCensus,
    /// Column heights of every level, in emission order (sub-products
    /// before the level that combines them).
    pub profiles: Vec<LevelProfile>,
}

impl Synthesis {
    pub fn gate_count(&self) -> usize {
        self.netlist.count_gates()
    }
}

/// Starting column heights of one construction level, indexed by weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelProfile {
    pub method: Method,
    pub bits: usize,
    pub plus: Vec<usize>,
    /// Subtrahend heights; all zero for the school method.
    pub minus: Vec<usize>,
}

/// Compares a recorded profile with its closed form. School levels below
/// four bits have no closed form and always pass.
pub fn check_profile(level: &LevelProfile) -> Result<(), SynthError> {
    let m = level.bits;
    let expected = match level.method {
        Method::School => school::expected_profile(m).map(|p| (p, vec![0; 2 * m])),
        Method::Karatsuba => Some(karatsuba::expected_addsub_profile(m)),
    };
    match expected {
        Some((plus, minus)) if plus != level.plus || minus != level.minus => Err(invariant(format!(
            "{}({m}) heights +{:?} -{:?} differ from +{plus:?} -{minus:?}",
            level.method, level.plus, level.minus
        ))),
        _ => Ok(()),
    }
}

/// Recursively emits an `m x m` multiplier following [`method_policy`].
/// Returns the product bits and the method trace.
pub fn emit_multiplier(
    b: &mut NetlistBuilder,
    x: &[WireRef],
    y: &[WireRef],
    sharing: bool,
    census: &mut BlockCensus,
    profiles: &mut Vec<LevelProfile>,
) -> Result<(Vec<WireRef>, String), SynthError> {
    match method_policy(x.len()) {
        Method::School => emit_school_checked(b, x, y, census, profiles),
        Method::Karatsuba => emit_karatsuba(b, x, y, sharing, census, profiles),
    }
}

fn emit_school_checked(
    b: &mut NetlistBuilder,
    x: &[WireRef],
    y: &[WireRef],
    census: &mut BlockCensus,
    profiles: &mut Vec<LevelProfile>,
) -> Result<(Vec<WireRef>, String), SynthError> {
    let mut local = BlockCensus::default();
    let out = school::emit_school(b, x, y, &mut local)?;
    school::check_school(x.len(), &out, &local)?;
    census.merge(&local);
    profiles.push(LevelProfile {
        method: Method::School,
        bits: x.len(),
        minus: vec![0; out.profile.len()],
        plus: out.profile,
    });
    Ok((out.bits, format!("school({})", x.len())))
}

/// One Karatsuba level over existing operand wires, sub-products chosen
/// by the policy.
pub fn emit_karatsuba(
    b: &mut NetlistBuilder,
    x: &[WireRef],
    y: &[WireRef],
    sharing: bool,
    census: &mut BlockCensus,
    profiles: &mut Vec<LevelProfile>,
) -> Result<(Vec<WireRef>, String), SynthError> {
    let m = x.len();
    if m < MIN_KARATSUBA_BITS || y.len() != m {
        return Err(SynthError::UnsupportedWidth {
            method: "karatsuba",
            bits: m,
            reason: format!("needs two operands of one width, at least {MIN_KARATSUBA_BITS} bits"),
        });
    }
    let [mid, high, low] = karatsuba::emit_preadders(b, x, y, census)?;
    let mut products = Vec::with_capacity(3);
    let mut traces = Vec::with_capacity(3);
    for (px, py) in [mid, high, low] {
        let (bits, trace) = emit_multiplier(b, &px, &py, sharing, census, profiles)?;
        products.push(bits);
        traces.push(trace);
    }
    let out = karatsuba::emit_final_addsub(b, m, &products[2], &products[0], &products[1], sharing, census)?;
    profiles.push(LevelProfile {
        method: Method::Karatsuba,
        bits: m,
        plus: out.h_plus,
        minus: out.h_minus,
    });
    let widths: Vec<&str> = traces
        .iter()
        .filter_map(|t| t.strip_prefix("school(").and_then(|r| r.strip_suffix(')')))
        .collect();
    let trace = if widths.len() == 3 {
        format!("karatsuba({m})→school({})", widths.join(","))
    } else {
        format!("karatsuba({m})→[{}]", traces.join(","))
    };
    Ok((out.bits, trace))
}

/// Builds a complete `m`-bit multiplier. `method = None` follows the
/// policy. Requesting Karatsuba where the school method is cheaper needs
/// `options.force`.
pub fn synthesize(m: usize, method: Option<Method>, options: KaratsubaOptions) -> Result<Synthesis, SynthError> {
    if m == 0 {
        return Err(SynthError::Domain("operand width must be at least 1".into()));
    }
    let method = method.unwrap_or_else(|| method_policy(m));
    if method == Method::Karatsuba && !options.force && !karatsuba::karatsuba_preferred(m) {
        return Err(SynthError::UnsupportedWidth {
            method: "karatsuba",
            bits: m,
            reason: "the school method is cheaper at this width; pass force to override".into(),
        });
    }
    let mut b = NetlistBuilder::new();
    let x = b.add_inputs("a", m)?;
    let y = b.add_inputs("b", m)?;
    let mut census = BlockCensus::default();
    let mut profiles = Vec::new();
    let (bits, trace) = match method {
        Method::School => emit_school_checked(&mut b, &x, &y, &mut census, &mut profiles)?,
        Method::Karatsuba => emit_karatsuba(&mut b, &x, &y, options.sharing, &mut census, &mut profiles)?,
    };
    let outputs: Vec<(String, WireRef)> = bits.iter().enumerate().map(|(k, w)| (format!("p{k}"), *w)).collect();
    let netlist = b.finish(&outputs)?;
    if netlist.count_gates() != census.gate_total() {
        return Err(invariant(format!(
            "netlist has {} gates but the census accounts for {}",
            netlist.count_gates(),
            census.gate_total()
        )));
    }
    Ok(Synthesis { bits: m, method, trace, netlist, census, profiles })
}

/// School-method multiplier of width `n`.
pub fn build_school(n: usize) -> Result<Synthesis, SynthError> {
    synthesize(n, Some(Method::School), KaratsubaOptions::default())
}

/// Karatsuba at the top level, sub-products by policy. `force` allows
/// widths where the school method is cheaper (down to 10 bits).
pub fn build_karatsuba(m: usize, force: bool) -> Result<Synthesis, SynthError> {
    synthesize(m, Some(Method::Karatsuba), KaratsubaOptions { force, sharing: true })
}

/// Policy-driven multiplier.
pub fn build_auto(m: usize) -> Result<Synthesis, SynthError> {
    synthesize(m, None, KaratsubaOptions::default())
}
