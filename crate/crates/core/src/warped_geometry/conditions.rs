use std::fmt;

use crate::numerics::bisect_sign_change;

use super::SurfaceOfRevolution;

const SIGN_SAMPLES: usize = 4096;
const CURVATURE_SAMPLES: usize = 64;
const CURVATURE_SPAN: f64 = 10.0;
const PARTITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `f'` changes sign exactly once, from positive to negative.
    J,
    /// `K' <= 0` far out.
    Jj,
    /// Finite total volume.
    Jjj,
    /// Tail volume well defined and consistent with the disk volume.
    Jv,
    /// `t0 f(tau) > f(t0)` for some `tau < t0` once `t0` is large.
    V,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::J => "j",
            Condition::Jj => "jj",
            Condition::Jjj => "jjj",
            Condition::Jv => "jv",
            Condition::V => "v",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub condition: Condition,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionsReport {
    pub j_holds: bool,
    pub jj_holds: bool,
    pub jjj_holds: bool,
    pub jv_holds: bool,
    pub v_holds: bool,
    /// Sign change of `f'`, when unique.
    pub t1: Option<f64>,
    /// Smallest scanned `t0 >= 5` admitting a witness for (v).
    pub v_threshold: Option<f64>,
    pub witnesses: Vec<Witness>,
}

impl ConditionsReport {
    pub fn all_hold(&self) -> bool {
        self.j_holds && self.jj_holds && self.jjj_holds && self.jv_holds && self.v_holds
    }

    pub fn holds(&self, c: Condition) -> bool {
        match c {
            Condition::J => self.j_holds,
            Condition::Jj => self.jj_holds,
            Condition::Jjj => self.jjj_holds,
            Condition::Jv => self.jv_holds,
            Condition::V => self.v_holds,
        }
    }

    pub fn witnesses_for(&self, c: Condition) -> impl Iterator<Item = &Witness> {
        self.witnesses.iter().filter(move |w| w.condition == c)
    }
}

/// Sample the structural conditions (j)–(v) on `surface`.
pub fn check_conditions(surface: &SurfaceOfRevolution) -> ConditionsReport {
    let mut witnesses = Vec::new();
    let w = surface.warping();
    let decay = w.decay_certificate();
    let start = w.asymptotic_start().max(decay.t0);

    // (j): scan f' for sign changes, skipping samples where f has underflowed
    let reach = start + 10.0 / decay.alpha;
    let mut changes = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut first_sign = 0.0;
    for i in 1..=SIGN_SAMPLES {
        let t = reach * i as f64 / SIGN_SAMPLES as f64;
        let (f, d1, _) = w.jet(t);
        if !(f > 0.0) || d1 == 0.0 {
            continue;
        }
        if let Some((tp, dp)) = prev {
            if dp.signum() != d1.signum() {
                changes.push((tp, t, dp));
            }
        } else {
            first_sign = d1.signum();
        }
        prev = Some((t, d1));
    }
    let j_holds = first_sign > 0.0 && changes.len() == 1 && changes[0].2 > 0.0;
    let t1 = if j_holds {
        let (a, b, _) = changes[0];
        bisect_sign_change(|t| w.deriv1(t), a, b, 1e-14).ok()
    } else {
        None
    };
    match t1 {
        Some(t) => {
            witnesses.push(Witness {
                condition: Condition::J,
                t,
                value: w.deriv1(t),
            });
        }
        None => {
            for &(a, b, _) in &changes {
                witnesses.push(Witness {
                    condition: Condition::J,
                    t: 0.5 * (a + b),
                    value: w.deriv1(0.5 * (a + b)),
                });
            }
            if changes.is_empty() {
                witnesses.push(Witness {
                    condition: Condition::J,
                    t: reach,
                    value: w.deriv1(reach),
                });
            }
        }
    }

    // (jj): K' by central differences of the closed-form curvature
    let jj_from = t1.unwrap_or(0.0).max(w.asymptotic_start()) + 1.0;
    let mut jj_holds = true;
    let mut jj_checked = 0;
    for i in 0..CURVATURE_SAMPLES {
        let t = jj_from + CURVATURE_SPAN * i as f64 / (CURVATURE_SAMPLES - 1) as f64;
        let h = 1e-4 * t.max(1.0);
        let (Ok(kp), Ok(km), Ok(k)) = (surface.curvature(t + h), surface.curvature(t - h), surface.curvature(t)) else {
            continue;
        };
        let dk = (kp - km) / (2.0 * h);
        jj_checked += 1;
        let ok = dk <= 1e-8 * k.abs().max(1.0);
        if !ok || i == 0 || i + 1 == CURVATURE_SAMPLES {
            witnesses.push(Witness {
                condition: Condition::Jj,
                t,
                value: dk,
            });
        }
        jj_holds &= ok;
    }
    if jj_checked == 0 {
        jj_holds = false;
        witnesses.push(Witness {
            condition: Condition::Jj,
            t: jj_from,
            value: f64::NAN,
        });
    }

    // (jjj): cached at construction by certified quadrature
    let a = surface.total_volume();
    let jjj_holds = a.is_finite() && a > 0.0;
    witnesses.push(Witness {
        condition: Condition::Jjj,
        t: 0.0,
        value: a,
    });

    // (jv): tail and disk volumes partition the total at a fixed radius
    let t0 = t1.unwrap_or(1.0);
    let jv = surface
        .tail_volume(t0)
        .and_then(|tail| surface.disk_volume(t0).map(|disk| (tail, disk)));
    let jv_holds = match jv {
        Ok((tail, disk)) => {
            witnesses.push(Witness {
                condition: Condition::Jv,
                t: t0,
                value: tail,
            });
            tail.is_finite() && tail > 0.0 && (tail + disk - a).abs() <= PARTITION_TOL * a
        }
        Err(_) => {
            witnesses.push(Witness {
                condition: Condition::Jv,
                t: t0,
                value: f64::NAN,
            });
            false
        }
    };

    // (v): smallest t0 on a 0.25-grid in [5, 50] with a witness tau
    let mut v_threshold = None;
    'scan: for k in 0..=180 {
        let t0 = 5.0 + 0.25 * k as f64;
        let ft0 = w.eval(t0);
        for i in 1..256 {
            let tau = t0 * i as f64 / 256.0;
            let lhs = t0 * w.eval(tau);
            if lhs > ft0 {
                v_threshold = Some(t0);
                witnesses.push(Witness {
                    condition: Condition::V,
                    t: t0,
                    value: lhs - ft0,
                });
                witnesses.push(Witness {
                    condition: Condition::V,
                    t: tau,
                    value: w.eval(tau),
                });
                break 'scan;
            }
        }
    }
    let v_holds = v_threshold.is_some();
    if !v_holds {
        witnesses.push(Witness {
            condition: Condition::V,
            t: 50.0,
            value: w.eval(50.0),
        });
    }

    ConditionsReport {
        j_holds,
        jj_holds,
        jjj_holds,
        jv_holds,
        v_holds,
        t1,
        v_threshold,
        witnesses,
    }
}
