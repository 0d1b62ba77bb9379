//! Strong-sample-complexity bounds and constructive teacher-equivalent
//! embeddings.
//!
//! The bounds are exact integer formulas. For a DLNN student the bound is
//! `d* + 1` (teacher parameter count plus one) regardless of student size;
//! for an FCDNN student it is `sum_l m*_l (m_{l-1} + 1) + 1` with the
//! student's layer-input widths. Both arise from lower-bounding the
//! teacher-equivalent set's dimension by an explicitly constructed chart,
//! which `embed_dlnn`/`embed_fcdnn` realize numerically: they produce
//! student parameters whose output matches the teacher everywhere, with
//! the stated number of freely chosen coordinates.
//!
//! Block layout of the DLNN chart (student layer l, top = teacher channel,
//! bottom = redundant channel):
//!
//! ```text
//!   l = 1..L*-1:   w = | w*(l)  0 |   b = | b*(l) |
//!                      | M      M |       | M     |
//!   l = L*..L-1:   w = | R(l)   0 |   b = | M     |
//!                      | M      M |       | M     |
//!   l = L:         w = | w*(L*) P^-1   0 |   b = b*(L*) - w*(L*) P^-1 q
//! ```
//!
//! with `P = R(L-1) ... R(L*)` and `q` the accumulated constant shift of the
//! top channel. The top-right blocks are zero: for a linear network the
//! redundant channel is an affine function of the input, so any feedback
//! into the teacher channel would add an input-dependent term that no
//! constant bias correction can cancel. With the feedback zeroed, the
//! correction `q` is input-independent and computable in closed form by
//! propagating the redundant biases (the x = 0 channel), and equivalence is
//! exact up to rounding.

use crate::data::Teacher;
use crate::error::{Error, Result};
use crate::linalg::{matmul, solve_or_invert, Matrix, Vector};
use crate::models::{forward_raw, DomainBox, Family, Interval, NetworkSpec, ParamVector, Workspace};
use crate::rng::SeededRng;
use serde::Serialize;

/// Singular-value floor for the regular blocks; keeps `P` well conditioned
/// across up to ~5 stacked factors.
pub const MIN_SINGULAR: f64 = 0.1;

/// Which bound produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundFamily {
    Dlnn,
    Fcdnn,
    Generic,
}

impl BoundFamily {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dlnn => "dlnn",
            Self::Fcdnn => "fcdnn",
            Self::Generic => "generic",
        }
    }
}

/// Exact integer strong-sample-complexity bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundReport {
    pub family: BoundFamily,
    /// Student parameter count.
    pub d_theta: usize,
    /// Constructed lower bound on the teacher-equivalent set's dimension.
    pub d_tes_lower: usize,
    /// Strong sample complexity upper bound, `d_theta - d_tes_lower + 1`.
    pub k_upper: usize,
}

/// One named precondition and whether it holds.
#[derive(Debug, Clone, Serialize)]
pub struct PreconditionCheck {
    pub name: String,
    pub ok: bool,
}

fn all_ok(checks: &[PreconditionCheck]) -> Result<()> {
    match checks.iter().find(|c| !c.ok) {
        Some(failed) => Err(Error::WidthCondition(failed.name.clone())),
        None => Ok(()),
    }
}

/// Named width/depth conditions for the DLNN bound.
pub fn dlnn_preconditions(teacher: &NetworkSpec, student: &NetworkSpec) -> Vec<PreconditionCheck> {
    let tw = teacher.widths();
    let sw = student.widths();
    let lt = teacher.depth();
    let ls = student.depth();
    let mut checks = vec![
        PreconditionCheck {
            name: "teacher family == dlnn".into(),
            ok: teacher.family() == Family::Dlnn,
        },
        PreconditionCheck {
            name: "student family == dlnn".into(),
            ok: student.family() == Family::Dlnn,
        },
        PreconditionCheck {
            name: format!("student depth {ls} >= teacher depth {lt}"),
            ok: ls >= lt,
        },
        PreconditionCheck {
            name: format!("input widths equal ({} vs {})", sw[0], tw[0]),
            ok: sw[0] == tw[0],
        },
        PreconditionCheck {
            name: format!(
                "output widths equal ({} vs {})",
                sw[ls],
                tw[lt]
            ),
            ok: sw[ls] == tw[lt],
        },
    ];
    for l in 1..lt {
        if l < sw.len() {
            checks.push(PreconditionCheck {
                name: format!("m_{l} = {} >= m*_{l} = {}", sw[l], tw[l]),
                ok: sw[l] >= tw[l],
            });
        }
    }
    if ls >= lt {
        let rsize = tw[lt - 1];
        for l in lt..ls {
            checks.push(PreconditionCheck {
                name: format!("m_{l} = {} >= m*_{} = {rsize}", sw[l], lt - 1),
                ok: sw[l] >= rsize,
            });
        }
    }
    checks
}

/// Named conditions for the FCDNN bound.
pub fn fcdnn_preconditions(teacher: &NetworkSpec, student: &NetworkSpec) -> Vec<PreconditionCheck> {
    let tw = teacher.widths();
    let sw = student.widths();
    let lt = teacher.depth();
    let ls = student.depth();
    let mut checks = vec![
        PreconditionCheck {
            name: "teacher family == fcdnn".into(),
            ok: teacher.family() == Family::Fcdnn,
        },
        PreconditionCheck {
            name: "student family == fcdnn".into(),
            ok: student.family() == Family::Fcdnn,
        },
        PreconditionCheck {
            name: format!(
                "same activation ({} vs {})",
                student.activation().name(),
                teacher.activation().name()
            ),
            ok: student.activation() == teacher.activation(),
        },
        PreconditionCheck {
            name: format!("equal depth ({ls} vs {lt})"),
            ok: ls == lt,
        },
        PreconditionCheck {
            name: format!("input widths equal ({} vs {})", sw[0], tw[0]),
            ok: sw[0] == tw[0],
        },
        PreconditionCheck {
            name: format!("output widths equal ({} vs {})", sw[ls], tw[lt]),
            ok: sw[ls] == tw[lt],
        },
    ];
    if ls == lt {
        for l in 1..lt {
            checks.push(PreconditionCheck {
                name: format!("m_{l} = {} >= m*_{l} = {}", sw[l], tw[l]),
                ok: sw[l] >= tw[l],
            });
        }
    }
    checks
}

/// General form: `k <= d_theta - d_tes + 1` from the two dimensions.
pub fn bound_from_dimensions(d_theta: usize, d_tes_lower: usize) -> Result<BoundReport> {
    if d_tes_lower > d_theta {
        return Err(Error::InvalidConfig(format!(
            "TES dimension {d_tes_lower} exceeds parameter dimension {d_theta}"
        )));
    }
    Ok(BoundReport {
        family: BoundFamily::Generic,
        d_theta,
        d_tes_lower,
        k_upper: d_theta - d_tes_lower + 1,
    })
}

/// DLNN bound: `k <= d* + 1`, independent of the student's size.
pub fn bound_dlnn(teacher: &NetworkSpec, student: &NetworkSpec) -> Result<BoundReport> {
    all_ok(&dlnn_preconditions(teacher, student))?;
    let d_theta = student.param_count();
    let d_star = teacher.param_count();
    Ok(BoundReport {
        family: BoundFamily::Dlnn,
        d_theta,
        d_tes_lower: d_theta - d_star,
        k_upper: d_star + 1,
    })
}

/// FCDNN bound: `k <= sum_l m*_l (m_{l-1} + 1) + 1` with student widths
/// `m_{l-1}` feeding each layer.
pub fn bound_fcdnn(teacher: &NetworkSpec, student: &NetworkSpec) -> Result<BoundReport> {
    let checks = fcdnn_preconditions(teacher, student);
    if teacher.depth() != student.depth() {
        return Err(Error::DepthMismatch {
            teacher: teacher.depth(),
            student: student.depth(),
        });
    }
    all_ok(&checks)?;
    let tw = teacher.widths();
    let sw = student.widths();
    let pinned: usize = (1..=teacher.depth()).map(|l| tw[l] * (sw[l - 1] + 1)).sum();
    let d_theta = student.param_count();
    Ok(BoundReport {
        family: BoundFamily::Fcdnn,
        d_theta,
        d_tes_lower: d_theta - pinned,
        k_upper: pinned + 1,
    })
}

/// CLI-facing JSON for a bound report, fields in documented order.
pub fn bound_report_json(report: &BoundReport, checks: &[PreconditionCheck]) -> String {
    let checks_json: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{{\"name\":{},\"ok\":{}}}",
                serde_json::Value::String(c.name.clone()),
                c.ok
            )
        })
        .collect();
    format!(
        "{{\"family\":\"{}\",\"d_theta\":{},\"d_tes_lower\":{},\"k_upper\":{},\"preconditions\":[{}]}}",
        report.family.name(),
        report.d_theta,
        report.d_tes_lower,
        report.k_upper,
        checks_json.join(",")
    )
}

/// A constructed teacher-equivalent student parameter, with bookkeeping on
/// how many coordinates the chart leaves free.
#[derive(Debug, Clone)]
pub struct EmbeddingWitness {
    pub student_params: ParamVector,
    /// Chart dimension in the bound's counting: `d_theta` minus the
    /// teacher-determined entries. For the DLNN chart this includes the
    /// structurally zero feedback blocks (see module docs); the number of
    /// coordinates actually drawn at random is `randomized_dimension`.
    pub free_dimension: usize,
    /// Coordinates drawn at random when sampling this witness.
    pub randomized_dimension: usize,
    /// The regular blocks used for depth extension (DLNN only).
    pub regular_blocks: Vec<Matrix>,
}

fn check_box(data: &[f64], domain: &DomainBox) -> Result<()> {
    let b = domain.half_width();
    for (index, &value) in data.iter().enumerate() {
        if value.abs() > b || value.is_nan() {
            return Err(Error::BoxOverflow {
                index,
                value,
                half_width: b,
            });
        }
    }
    Ok(())
}

/// Embed a DLNN teacher into a wider/deeper DLNN student. The returned
/// parameters replicate the teacher's input-output map; the residual over
/// random inputs stays below ~1e-9 (rounding through `P^{-1}` only).
pub fn embed_dlnn(
    teacher: &Teacher,
    student_spec: &NetworkSpec,
    mut rng: SeededRng,
    domain: &DomainBox,
) -> Result<EmbeddingWitness> {
    all_ok(&dlnn_preconditions(teacher.spec(), student_spec))?;
    let tw = teacher.spec().widths().to_vec();
    let sw = student_spec.widths().to_vec();
    let lt = teacher.spec().depth();
    let ls = student_spec.depth();
    let rsize = tw[lt - 1];

    // Top-channel width entering layer l (l-1 indexes the layer input).
    let top = |l: usize| -> usize {
        if l == 0 {
            tw[0]
        } else if l < lt {
            tw[l]
        } else if l < ls {
            rsize
        } else {
            sw[ls]
        }
    };

    let mut data = vec![0.0; student_spec.param_count()];
    let mut randomized = 0usize;
    let mut regular_blocks = Vec::new();
    // Constant shift of the top channel, propagated through the R layers.
    let mut q = vec![0.0; rsize];

    for l in 1..ls {
        let rows = sw[l];
        let cols = sw[l - 1];
        let t_r = top(l);
        let t_c = top(l - 1);
        let woff = student_spec.weight_offset(l);
        let boff = student_spec.bias_offset(l);

        let r_block = if l >= lt {
            let r = crate::linalg::random_regular(rsize, &mut rng, MIN_SINGULAR);
            regular_blocks.push(r.clone());
            Some(r)
        } else {
            None
        };

        for i in 0..rows {
            for j in 0..cols {
                let idx = woff + i * cols + j;
                data[idx] = if i < t_r && j < t_c {
                    match &r_block {
                        Some(r) => r.get(i, j),
                        None => teacher.params().weight(l)[i * tw[l - 1] + j],
                    }
                } else if i < t_r {
                    0.0 // no feedback from the redundant channel into the top
                } else {
                    randomized += 1;
                    rng.uniform(-1.0, 1.0)
                };
            }
        }
        if let Some(r) = &r_block {
            randomized += r.rows() * r.cols();
        }

        let mut b_top = vec![0.0; t_r];
        for i in 0..rows {
            let idx = boff + i;
            data[idx] = if i < t_r {
                if l < lt {
                    teacher.params().bias(l)[i]
                } else {
                    randomized += 1;
                    rng.uniform(-1.0, 1.0)
                }
            } else {
                randomized += 1;
                rng.uniform(-1.0, 1.0)
            };
            if i < t_r {
                b_top[i] = data[idx];
            }
        }

        // Track the constant offset of the top channel past the teacher's
        // depth: q <- R q + b_top (q stays zero through teacher layers).
        if let Some(r) = &r_block {
            let mut next_q = b_top;
            for (i, slot) in next_q.iter_mut().enumerate() {
                for (j, &qj) in q.iter().enumerate() {
                    *slot += r.get(i, j) * qj;
                }
            }
            q = next_q;
        }
    }

    // Last layer: w = (w*(L*) P^-1 | 0), b = b*(L*) - w*(L*) P^-1 q.
    let m_out = sw[ls];
    let w_star = Matrix::new(m_out, rsize, teacher.params().weight(lt).to_vec())
        .expect("teacher weights valid");
    let w_top = if ls > lt {
        let mut p = Matrix::identity(rsize);
        for r in &regular_blocks {
            p = matmul(r, &p).expect("square blocks");
        }
        let p_inv = solve_or_invert(&p)?;
        matmul(&w_star, &p_inv)?
    } else {
        w_star
    };

    let cols = sw[ls - 1];
    let t_c = top(ls - 1);
    let woff = student_spec.weight_offset(ls);
    let boff = student_spec.bias_offset(ls);
    for i in 0..m_out {
        for j in 0..t_c {
            data[woff + i * cols + j] = w_top.get(i, j);
        }
    }
    for i in 0..m_out {
        let mut correction = 0.0;
        for (j, &qj) in q.iter().enumerate() {
            correction += w_top.get(i, j) * qj;
        }
        data[boff + i] = teacher.params().bias(lt)[i] - correction;
    }

    check_box(&data, domain)?;
    let d_theta = student_spec.param_count();
    let d_star = teacher.spec().param_count();
    Ok(EmbeddingWitness {
        student_params: ParamVector::new(student_spec.clone(), data)?,
        free_dimension: d_theta - d_star,
        randomized_dimension: randomized,
        regular_blocks,
    })
}

/// Embed an FCDNN teacher into a wider FCDNN student of the same depth and
/// activation. The zero blocks decouple the redundant units from the
/// teacher channel, so equivalence is exact up to float rounding with no
/// matrix inversion involved.
pub fn embed_fcdnn(
    teacher: &Teacher,
    student_spec: &NetworkSpec,
    mut rng: SeededRng,
    domain: &DomainBox,
) -> Result<EmbeddingWitness> {
    if teacher.spec().depth() != student_spec.depth() {
        return Err(Error::DepthMismatch {
            teacher: teacher.spec().depth(),
            student: student_spec.depth(),
        });
    }
    all_ok(&fcdnn_preconditions(teacher.spec(), student_spec))?;
    let tw = teacher.spec().widths().to_vec();
    let sw = student_spec.widths().to_vec();
    let depth = student_spec.depth();

    let mut data = vec![0.0; student_spec.param_count()];
    let mut randomized = 0usize;

    for l in 1..=depth {
        let rows = sw[l];
        let cols = sw[l - 1];
        let t_r = tw[l];
        let t_c = tw[l - 1];
        let woff = student_spec.weight_offset(l);
        let boff = student_spec.bias_offset(l);

        for i in 0..rows {
            for j in 0..cols {
                data[woff + i * cols + j] = if i < t_r && j < t_c {
                    teacher.params().weight(l)[i * t_c + j]
                } else if i < t_r {
                    0.0
                } else {
                    randomized += 1;
                    rng.uniform(-1.0, 1.0)
                };
            }
        }
        for i in 0..rows {
            data[boff + i] = if i < t_r {
                teacher.params().bias(l)[i]
            } else {
                randomized += 1;
                rng.uniform(-1.0, 1.0)
            };
        }
    }

    check_box(&data, domain)?;
    let d_theta = student_spec.param_count();
    let pinned: usize = (1..=depth).map(|l| tw[l] * (sw[l - 1] + 1)).sum();
    Ok(EmbeddingWitness {
        student_params: ParamVector::new(student_spec.clone(), data)?,
        free_dimension: d_theta - pinned,
        randomized_dimension: randomized,
        regular_blocks: Vec::new(),
    })
}

/// Draw one teacher-equivalent student parameter with a fresh free part.
pub fn sample_tes_point(
    teacher: &Teacher,
    student_spec: &NetworkSpec,
    rng: SeededRng,
    domain: &DomainBox,
) -> Result<ParamVector> {
    let witness = match student_spec.family() {
        Family::Dlnn => embed_dlnn(teacher, student_spec, rng, domain)?,
        Family::Fcdnn => embed_fcdnn(teacher, student_spec, rng, domain)?,
    };
    Ok(witness.student_params)
}

/// Max output discrepancy `||f_student(x) - f_teacher(x)||` over `n_inputs`
/// random inputs from the box.
pub fn equivalence_residual(
    teacher: &Teacher,
    student_params: &ParamVector,
    n_inputs: usize,
    input_box: &Interval,
    mut rng: SeededRng,
) -> Result<f64> {
    if student_params.spec().input_dim() != teacher.spec().input_dim()
        || student_params.spec().output_dim() != teacher.spec().output_dim()
    {
        return Err(Error::DimensionMismatch {
            context: "student/teacher interface dimensions",
            expected: teacher.spec().input_dim(),
            got: student_params.spec().input_dim(),
        });
    }
    let m = teacher.spec().input_dim();
    let mut ws_t = Workspace::new(teacher.spec());
    let mut ws_s = Workspace::new(student_params.spec());
    let mut x = vec![0.0; m];
    let mut worst = 0.0f64;
    for _ in 0..n_inputs {
        rng.fill_uniform(&mut x, input_box.lo, input_box.hi);
        forward_raw(teacher.spec(), teacher.params().data(), &x, &mut ws_t);
        forward_raw(
            student_params.spec(),
            student_params.data(),
            &x,
            &mut ws_s,
        );
        let mut err = 0.0;
        for (s, t) in ws_s.output().iter().zip(ws_t.output()) {
            err += (s - t) * (s - t);
        }
        worst = worst.max(err.sqrt());
    }
    Ok(worst)
}

/// Convenience: the teacher's output on one input (used by oracles).
pub fn teacher_output(teacher: &Teacher, x: &Vector) -> Result<Vector> {
    crate::models::forward(teacher.params(), x)
}
