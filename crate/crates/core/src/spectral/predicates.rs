//! Completely non-resonant boxes, tunneling, and the full classification of
//! a box at a given energy and mass.

use serde::{Deserialize, Serialize};

use super::{diagonalize, eigenvalues, factor_params, is_er, EnergyGrid, SpectralData};
use crate::error::{Error, Result};
use crate::geometry::{is_fully_interactive, BoxSpec, Config};
use crate::hamiltonian::{assemble, ModelParams, PotentialMap};

/// `round(L^{1/α})`, the side of the previous scale.
pub fn previous_scale(l: u32, alpha: f64) -> u32 {
    (l as f64).powf(1.0 / alpha).round().max(1.0) as u32
}

/// Diagonalized sub-boxes of one container for one realization.
#[derive(Clone, Debug)]
pub struct SubBoxFamily {
    pub container: BoxSpec,
    pub sub_side: u32,
    pub stride: u32,
    pub spectra: Vec<SpectralData>,
}

impl SubBoxFamily {
    pub fn build(
        container: &BoxSpec,
        sub_side: u32,
        stride: u32,
        params: &ModelParams,
        v: &PotentialMap,
    ) -> Result<Self> {
        let boxes = container.sub_boxes(sub_side, stride);
        Self::from_boxes(container, sub_side, stride, &boxes, params, v)
    }

    /// Family over an explicit list of sub-boxes of `container`.
    pub fn from_boxes(
        container: &BoxSpec,
        sub_side: u32,
        stride: u32,
        boxes: &[BoxSpec],
        params: &ModelParams,
        v: &PotentialMap,
    ) -> Result<Self> {
        let spectra = boxes
            .iter()
            .map(|b| diagonalize(&assemble(b, params, v)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(SubBoxFamily {
            container: container.clone(),
            sub_side,
            stride,
            spectra,
        })
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }

    pub fn boxes(&self) -> impl Iterator<Item = &BoxSpec> + '_ {
        self.spectra.iter().map(|s| &s.box_spec)
    }

    /// Positions of the `(E, m)`-S sub-boxes.
    pub fn singular(&self, e: f64, m: f64) -> Vec<usize> {
        (0..self.spectra.len())
            .filter(|&i| self.spectra[i].is_singular(e, m))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcnrOutcome {
    pub cnr: bool,
    /// The box itself is `E`-R.
    pub box_resonant: bool,
    /// The sub-box side is not smaller than the box, so only the box was checked.
    pub degenerate: bool,
    pub sub_side: u32,
    pub stride: u32,
    /// First resonant sub-box in lexicographic order.
    pub offending: Option<BoxSpec>,
}

/// `E`-CNR: the box and every sub-box of side `round(L^{1/α})` on the
/// stride grid are `E`-NR.
pub fn is_ecnr(
    b: &BoxSpec,
    params: &ModelParams,
    v: &PotentialMap,
    e: f64,
    beta: f64,
    alpha: f64,
    stride: u32,
) -> Result<EcnrOutcome> {
    let eigs = eigenvalues(&assemble(b, params, v)?);
    ecnr_with(b, &eigs, params, v, e, beta, alpha, stride)
}

#[allow(clippy::too_many_arguments)]
fn ecnr_with(
    b: &BoxSpec,
    box_eigs: &[f64],
    params: &ModelParams,
    v: &PotentialMap,
    e: f64,
    beta: f64,
    alpha: f64,
    stride: u32,
) -> Result<EcnrOutcome> {
    let sub_side = previous_scale(b.side, alpha);
    let degenerate = sub_side >= b.side;
    let box_resonant = is_er(box_eigs, e, b.side, beta);
    let mut out = EcnrOutcome {
        cnr: !box_resonant,
        box_resonant,
        degenerate,
        sub_side,
        stride,
        offending: None,
    };
    if box_resonant || degenerate {
        return Ok(out);
    }
    for sub in b.sub_boxes(sub_side, stride) {
        let eigs = eigenvalues(&assemble(&sub, params, v)?);
        if is_er(&eigs, e, sub_side, beta) {
            out.cnr = false;
            out.offending = Some(sub);
            break;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtOutcome {
    pub tunneling: bool,
    pub energy: Option<f64>,
    pub pair: Option<(BoxSpec, BoxSpec)>,
    pub sub_side: u32,
    pub grid_meta: String,
}

/// `m`-tunneling: for some grid energy, two sub-boxes with disjoint site
/// sets are both `(E, m)`-S.
#[allow(clippy::too_many_arguments)]
pub fn is_mt(
    b: &BoxSpec,
    params: &ModelParams,
    v: &PotentialMap,
    grid: &EnergyGrid,
    m: f64,
    sub_side: u32,
    stride: u32,
) -> Result<MtOutcome> {
    if sub_side >= b.side {
        return Err(Error::InvalidParameter(format!(
            "tunneling sub-box side {} must be below the box side {}",
            sub_side, b.side
        )));
    }
    if grid.is_empty() {
        return Ok(no_tunneling(sub_side, grid));
    }
    let family = SubBoxFamily::build(b, sub_side, stride, params, v)?;
    Ok(is_mt_with(&family, grid, m))
}

fn no_tunneling(sub_side: u32, grid: &EnergyGrid) -> MtOutcome {
    MtOutcome {
        tunneling: false,
        energy: None,
        pair: None,
        sub_side,
        grid_meta: grid.meta(),
    }
}

/// Tunneling test on precomputed sub-box spectra.
pub fn is_mt_with(family: &SubBoxFamily, grid: &EnergyGrid, m: f64) -> MtOutcome {
    for e in grid.energies() {
        let singular = family.singular(e, m);
        for (k, &i) in singular.iter().enumerate() {
            let bi = &family.spectra[i].box_spec;
            if let Some(&j) = singular[k + 1..]
                .iter()
                .find(|&&j| !bi.intersects(&family.spectra[j].box_spec))
            {
                return MtOutcome {
                    tunneling: true,
                    energy: Some(e),
                    pair: Some((bi.clone(), family.spectra[j].box_spec.clone())),
                    sub_side: family.sub_side,
                    grid_meta: grid.meta(),
                };
            }
        }
    }
    no_tunneling(family.sub_side, grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub beta: f64,
    pub alpha: f64,
    /// Energies scanned by the tunneling test.
    pub grid: EnergyGrid,
    /// Tunneling sub-box side; `round(L^{1/α})` when absent.
    pub sub_side: Option<u32>,
    pub stride: u32,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            beta: super::DEFAULT_BETA,
            alpha: 1.5,
            grid: EnergyGrid::new(-1.0, 1.0, 64),
            sub_side: None,
            stride: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub ens: bool,
    pub er: bool,
    pub ecnr: bool,
    pub fi: bool,
    pub mt: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    pub gf_max_site: Option<Config>,
    pub gf_max_value: f64,
    pub nearest_eigenvalue: Option<f64>,
    pub resonant_subbox: Option<BoxSpec>,
    /// Particles of the factor box that tunnels, for boxes of two or more
    /// particles.
    pub tunneling_factor: Option<Vec<usize>>,
    pub tunneling_pair: Option<(BoxSpec, BoxSpec)>,
    pub tunneling_energy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    #[serde(rename = "box")]
    pub box_spec: BoxSpec,
    #[serde(rename = "E")]
    pub energy: f64,
    pub m: f64,
    pub flags: Flags,
    pub witnesses: Witnesses,
    pub cnr_degenerate: bool,
    pub tunneling_sub_side: u32,
    pub stride: u32,
    pub grid_meta: String,
}

/// Every box predicate at `(E, m)`.
///
/// A single-particle box is tested for tunneling directly; a box of
/// `N ≥ 2` particles tunnels when one of its proper factor boxes does.
pub fn classify(
    b: &BoxSpec,
    params: &ModelParams,
    v: &PotentialMap,
    e: f64,
    m: f64,
    opts: &ClassifyOptions,
) -> Result<ClassificationReport> {
    let op = assemble(b, params, v)?;
    let spec = diagonalize(&op)?;
    let ens = spec.is_ens(e, m);
    let er = spec.is_er(e, opts.beta);
    let cnr = ecnr_with(
        b,
        &spec.eigenvalues,
        params,
        v,
        e,
        opts.beta,
        opts.alpha,
        opts.stride,
    )?;
    let fi = is_fully_interactive(b, params.r0() as u64);

    let sub_side = opts.sub_side.unwrap_or_else(|| previous_scale(b.side, opts.alpha));
    let mut tunneling: Option<(Option<Vec<usize>>, MtOutcome)> = None;
    if sub_side < b.side {
        let n = b.n_particles();
        if n == 1 {
            let out = is_mt(b, params, v, &opts.grid, m, sub_side, opts.stride)?;
            if out.tunneling {
                tunneling = Some((None, out));
            }
        } else {
            for mask in 1usize..(1 << n) - 1 {
                let part: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let factor = b.factor(&part);
                let fp = factor_params(params, part.len());
                let out = is_mt(&factor, &fp, v, &opts.grid, m, sub_side, opts.stride)?;
                if out.tunneling {
                    tunneling = Some((Some(part), out));
                    break;
                }
            }
        }
    }

    let (tunneling_factor, mt_out) = match tunneling {
        Some((f, out)) => (f, Some(out)),
        None => (None, None),
    };
    Ok(ClassificationReport {
        box_spec: b.clone(),
        energy: e,
        m,
        flags: Flags {
            ens: ens.ns,
            er,
            ecnr: cnr.cnr,
            fi,
            mt: mt_out.is_some(),
        },
        witnesses: Witnesses {
            gf_max_site: ens.argmax,
            gf_max_value: ens.max_value,
            nearest_eigenvalue: super::nearest_eigenvalue(&spec.eigenvalues, e).map(|p| p.0),
            resonant_subbox: cnr.offending,
            tunneling_factor,
            tunneling_pair: mt_out.as_ref().and_then(|o| o.pair.clone()),
            tunneling_energy: mt_out.as_ref().and_then(|o| o.energy),
        },
        cnr_degenerate: cnr.degenerate,
        tunneling_sub_side: sub_side,
        stride: opts.stride,
        grid_meta: opts.grid.meta(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::InteractionSpec;
    use crate::spectral::resonance_radius;

    fn line_box(c: &[i64], side: u32) -> BoxSpec {
        BoxSpec::new(Config::line(c), side)
    }

    #[test]
    fn previous_scale_values() {
        assert_eq!(previous_scale(9, 1.5), 4);
        assert_eq!(previous_scale(2, 1.5), 2);
        assert_eq!(previous_scale(27, 1.5), 9);
    }

    #[test]
    fn resonant_box_is_not_cnr() {
        let b = line_box(&[0], 9);
        let p = ModelParams::new(1, 1, 5.0, 3);
        let v = p.potential_for(&b, 0);
        let eigs = eigenvalues(&assemble(&b, &p, &v).unwrap());
        let out = is_ecnr(&b, &p, &v, eigs[4], 0.5, 1.5, 1).unwrap();
        assert!(out.box_resonant && !out.cnr);
    }

    #[test]
    fn degenerate_cnr_checks_only_the_box() {
        let b = line_box(&[0], 2);
        let p = ModelParams::new(1, 1, 5.0, 3);
        let v = p.potential_for(&b, 0);
        let out = is_ecnr(&b, &p, &v, 100.0, 0.5, 1.5, 1).unwrap();
        assert!(out.degenerate && out.cnr);
    }

    #[test]
    fn cnr_matches_exhaustive_center_scan() {
        let b = line_box(&[0], 9);
        let p = ModelParams::new(1, 1, 5.0, 17);
        for r in 0..20 {
            let v = p.potential_for(&b, r);
            for e in [0.0, 1.3, 2.9, 4.1] {
                let out = is_ecnr(&b, &p, &v, e, 0.5, 1.5, 1).unwrap();
                assert_eq!(out.sub_side, 4);
                let mut want = !is_er(&eigenvalues(&assemble(&b, &p, &v).unwrap()), e, 9, 0.5);
                for c in -2..=2 {
                    let sub = line_box(&[c], 4);
                    let eigs = eigenvalues(&assemble(&sub, &p, &v).unwrap());
                    if eigs.iter().any(|l| (l - e).abs() < resonance_radius(4, 0.5)) {
                        want = false;
                    }
                }
                assert_eq!(out.cnr, want);
                assert!(!(out.cnr && out.box_resonant));
            }
        }
    }

    #[test]
    fn tunneling_edge_cases() {
        let b = line_box(&[0], 8);
        let p = ModelParams::new(1, 1, 0.0, 0);
        let v = p.potential_for(&b, 0);
        let empty = EnergyGrid::new(1.0, -1.0, 64);
        assert!(!is_mt(&b, &p, &v, &empty, 0.1, 2, 1).unwrap().tunneling);
        // an infinitely negative mass makes the threshold infinite: nothing is S
        let grid = EnergyGrid::new(-1.0, 1.0, 64);
        let out = is_mt(&b, &p, &v, &grid, f64::NEG_INFINITY, 2, 1).unwrap();
        assert!(!out.tunneling);
        assert!(is_mt(&b, &p, &v, &grid, 0.1, 8, 1).is_err());
    }

    #[test]
    fn free_box_tunnels_only_near_sub_box_spectrum() {
        // free sub-boxes of side 2 have spectrum {-√2, 0, √2}; near E = 0 the
        // center-to-edge entry is about 1/2, below the threshold e^{-0.4}
        let b = line_box(&[0], 8);
        let p = ModelParams::new(1, 1, 0.0, 0);
        let v = p.potential_for(&b, 0);
        let off = EnergyGrid::new(-5.0, -4.0, 8);
        assert!(!is_mt(&b, &p, &v, &off, 0.2, 2, 1).unwrap().tunneling);
        let near = EnergyGrid::new(-0.01, 0.01, 2);
        assert!(!is_mt(&b, &p, &v, &near, 0.2, 2, 1).unwrap().tunneling);
        let hit = EnergyGrid::new(-0.01, 0.01, 3);
        let out = is_mt(&b, &p, &v, &hit, 0.2, 2, 1).unwrap();
        assert!(out.tunneling);
        assert_eq!(out.energy, Some(0.0));
        let (a, c) = out.pair.unwrap();
        assert!(!a.intersects(&c));
    }

    #[test]
    fn tunneling_matches_brute_force() {
        let b = line_box(&[0], 6);
        let p = ModelParams::new(1, 1, 3.0, 4);
        let grid = EnergyGrid::new(-0.5, 3.5, 17);
        for r in 0..10 {
            let v = p.potential_for(&b, r);
            let out = is_mt(&b, &p, &v, &grid, 0.3, 2, 1).unwrap();
            let subs: Vec<BoxSpec> = (-2..=2).map(|c| line_box(&[c], 2)).collect();
            let mut want = false;
            for e in grid.energies() {
                let s: Vec<bool> = subs
                    .iter()
                    .map(|sb| {
                        let op = assemble(sb, &p, &v).unwrap();
                        match crate::spectral::resolvent_column(&op, e, &sb.center) {
                            Ok(col) => crate::geometry::boundary(sb, p.adjacency)
                                .iter()
                                .map(|y| col[op.index_of(y).unwrap()].abs())
                                .fold(0.0, f64::max)
                                > (-0.3 * 2.0f64).exp(),
                            Err(_) => true,
                        }
                    })
                    .collect();
                for i in 0..5 {
                    for j in i + 1..5 {
                        if s[i] && s[j] && (subs[i].center.coords()[0] - subs[j].center.coords()[0]).abs() > 2 {
                            want = true;
                        }
                    }
                }
            }
            assert_eq!(out.tunneling, want, "realization {}", r);
        }
    }

    #[test]
    fn classification_report_is_consistent() {
        let b = line_box(&[0, 1], 6);
        let p = ModelParams::new(1, 2, 5.0, 1)
            .with_interaction(InteractionSpec::Constant { r0: 1, u0: 1.0 });
        let v = p.potential_for(&b, 2);
        let opts = ClassifyOptions::default();
        let rep = classify(&b, &p, &v, 0.7, 0.2, &opts).unwrap();
        assert!(rep.flags.fi);
        assert!(!(rep.flags.ecnr && rep.flags.er));
        assert_eq!(rep.tunneling_sub_side, 3);
        let again = classify(&b, &p, &v, 0.7, 0.2, &opts).unwrap();
        assert_eq!(rep, again);
        let pi = line_box(&[0, 40], 6);
        let v = p.potential_for(&pi, 2);
        assert!(!classify(&pi, &p, &v, 0.7, 0.2, &opts).unwrap().flags.fi);
    }
}
