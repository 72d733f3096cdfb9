//! Executable checks of the structural facts about weakly stable matchings of
//! a completed instance. Each check tests the conclusion only; whether the
//! matching is weakly stable is for the caller to establish with
//! [`crate::verify`].

use std::fmt;

use crate::model::{AgentRef, Instance, Matching};

use super::gadget::{GadgetAgent, GadgetMap};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    /// False when the hypothesis of the check does not hold.
    pub applicable: bool,
    /// Number of individual conclusions examined.
    pub checked: usize,
    pub violations: Vec<String>,
}

impl CheckReport {
    fn not_applicable() -> Self {
        CheckReport::default()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.applicable {
            return f.write_str("not applicable");
        }
        write!(f, "{} checked, {} violations", self.checked, self.violations.len())
    }
}

fn show(g: GadgetAgent) -> String {
    format!("({}, {}, {})", g.j, g.source, g.t)
}

/// Admirer bound: when the non-dummy `(0, alpha, t_star)` is not matched into
/// its prefix, every `(j, alpha, t)` with `j <= (k-1)(k-2)` is matched to
/// some `(j', alpha, t+1)` with `j' <= j + k - 1`.
pub fn check_admirer(map: &GadgetMap, hat_mu: &Matching, alpha: AgentRef, t_star: usize) -> CheckReport {
    let k = map.k();
    if alpha.t != t_star || t_star >= k || alpha.i >= map.input_n() {
        return CheckReport::not_applicable();
    }
    let nd = map.non_dummy(alpha);
    if map.in_hat_p_prime(alpha, hat_mu.partner(nd)) {
        return CheckReport::not_applicable();
    }
    let mut report = CheckReport {
        applicable: true,
        ..CheckReport::default()
    };
    let max_j = (k - 1) * (k - 2);
    for t in 0..k {
        for j in 0..=max_j {
            let g = GadgetAgent { j, source: alpha, t };
            let p = map.decode(hat_mu.partner(map.encode(g)));
            report.checked += 1;
            if p.t != (t + 1) % k || p.source != alpha || p.j > j + k - 1 {
                report
                    .violations
                    .push(format!("{} is matched to {}", show(g), show(p)));
            }
        }
    }
    report
}

/// Gadget confinement: a family containing a non-dummy `(0, alpha, t*)` whose
/// successor is outside `alpha`'s prefix stays inside `alpha`'s gadget, with
/// the member `s` steps later in column at most `(k-1) s`.
pub fn check_gadget_confinement(map: &GadgetMap, hat_mu: &Matching) -> CheckReport {
    let k = map.k();
    let mut report = CheckReport {
        applicable: true,
        ..CheckReport::default()
    };
    for f in hat_mu.families() {
        let coords: Vec<GadgetAgent> = (0..k).map(|t| map.decode(f.member(t))).collect();
        for t_star in 0..k {
            let g = coords[t_star];
            if !map.is_non_dummy(g) || map.in_hat_p_prime(g.source, f.member((t_star + 1) % k)) {
                continue;
            }
            for s in 0..k {
                let h = coords[(t_star + s) % k];
                report.checked += 1;
                if h.source != g.source || h.j > (k - 1) * s {
                    report.violations.push(format!(
                        "family ({f}): member {} steps after {} is {}",
                        s,
                        show(g),
                        show(h)
                    ));
                }
            }
        }
    }
    report
}

/// Correspondence: a non-dummy matched into its prefix is matched to the
/// non-dummy of its partner in the induced matching `mu`.
pub fn check_correspondence(map: &GadgetMap, hat_mu: &Matching, mu: &Matching) -> CheckReport {
    let (k, n) = (map.k(), map.input_n());
    let mut report = CheckReport {
        applicable: true,
        ..CheckReport::default()
    };
    for a in 0..map.input_agents() {
        let alpha = AgentRef::new(a / n, a % n);
        let p = hat_mu.partner(map.non_dummy(alpha));
        if !map.in_hat_p_prime(alpha, p) {
            continue;
        }
        report.checked += 1;
        let expected = map.encode(GadgetAgent {
            j: 0,
            source: mu.partner(alpha),
            t: (alpha.t + 1) % k,
        });
        if p != expected {
            report.violations.push(format!(
                "non-dummy of {alpha} is matched to {} but its induced partner maps to {}",
                show(map.decode(p)),
                show(map.decode(expected))
            ));
        }
    }
    report
}

/// Preference transfer for `hat_mu = induce_up(mu)`: whatever a non-dummy
/// `(0, alpha, t)` prefers to its partner lies in `alpha`'s prefix and maps
/// to an agent `alpha` prefers to `mu(alpha)`.
pub fn check_preference(out: &Instance, map: &GadgetMap, hat_mu: &Matching, mu: &Matching) -> CheckReport {
    let (k, n) = (map.k(), map.input_n());
    let mut report = CheckReport {
        applicable: true,
        ..CheckReport::default()
    };
    for a in 0..map.input_agents() {
        let alpha = AgentRef::new(a / n, a % n);
        let nd = map.non_dummy(alpha);
        let partner = hat_mu.partner(nd);
        for &b in out.list(nd) {
            let b = AgentRef::new((alpha.t + 1) % k, b as usize);
            if b == partner {
                break;
            }
            report.checked += 1;
            let ok = map.in_hat_p_prime(alpha, b)
                && map
                    .input()
                    .prefers(alpha, map.decode(b).source, mu.partner(alpha))
                    .unwrap_or(false);
            if !ok {
                report.violations.push(format!(
                    "non-dummy of {alpha} prefers {} without a matching preference upstream",
                    show(map.decode(b))
                ));
            }
        }
    }
    report
}
