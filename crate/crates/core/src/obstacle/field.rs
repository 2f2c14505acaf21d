use std::io::Write;

use crate::error::{Error, Result};
use crate::numkit::vector::ensure_len;

use super::{coincidence_set, CornerRule, DiscreteObstacle, COIN_TOL};

/// One node of the full grid, boundary included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldNode {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub psi: f64,
    pub active: bool,
}

/// `(4 u1 - u2 + 2 h g) / 3`: the boundary value that makes the one-sided
/// second-order outward derivative equal to `g`.
fn extrapolate(u1: f64, u2: f64, h: f64, g: f64) -> f64 {
    (4.0 * u1 - u2 + 2.0 * h * g) / 3.0
}

/// Extends an interior field to all `(N+2)^2` grid nodes, row-major with
/// `x` fastest. Dirichlet boundaries take the prescribed value; Neumann
/// boundaries are rebuilt from the same one-sided formula used in the
/// elimination, with corners handled by the obstacle's [`CornerRule`].
pub fn full_field(d: &DiscreteObstacle, u: &[f64]) -> Result<Vec<FieldNode>> {
    ensure_len(u, d.dim(), "u")?;
    let g = &d.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (w, h) = (nx + 2, ny + 2);
    let mut full = vec![0.0; w * h];
    let at = |i: usize, j: usize| j * w + i;
    for j in 0..ny {
        for i in 0..nx {
            full[at(i + 1, j + 1)] = u[g.index(i, j)];
        }
    }

    let problem = d.spec.problem;
    if let Some(value) = problem.dirichlet_value() {
        for j in 0..h {
            for i in 0..w {
                if i == 0 || j == 0 || i == w - 1 || j == h - 1 {
                    full[at(i, j)] = value;
                }
            }
        }
    } else {
        let flux = problem
            .neumann_flux()
            .ok_or_else(|| Error::InvalidArgument("problem has no boundary condition".into()))?;
        for j in 1..=ny {
            full[at(0, j)] = extrapolate(full[at(1, j)], full[at(2, j)], g.dx, flux);
            full[at(w - 1, j)] = extrapolate(full[at(w - 2, j)], full[at(w - 3, j)], g.dx, flux);
        }
        for i in 1..=nx {
            full[at(i, 0)] = extrapolate(full[at(i, 1)], full[at(i, 2)], g.dy, flux);
            full[at(i, h - 1)] = extrapolate(full[at(i, h - 2)], full[at(i, h - 3)], g.dy, flux);
        }
        // (corner, x-direction inward step, y-direction inward step)
        let corners = [
            (0, 0, 1isize, 1isize),
            (w - 1, 0, -1, 1),
            (0, h - 1, 1, -1),
            (w - 1, h - 1, -1, -1),
        ];
        for (ci, cj, si, sj) in corners {
            let step = |base: usize, s: isize, k: isize| (base as isize + s * k) as usize;
            let along_x = extrapolate(
                full[at(step(ci, si, 1), cj)],
                full[at(step(ci, si, 2), cj)],
                g.dx,
                flux,
            );
            let along_y = extrapolate(
                full[at(ci, step(cj, sj, 1))],
                full[at(ci, step(cj, sj, 2))],
                g.dy,
                flux,
            );
            full[at(ci, cj)] = match d.spec.corner {
                CornerRule::Average => 0.5 * (along_x + along_y),
                CornerRule::XEdge => along_x,
                CornerRule::YEdge => along_y,
            };
        }
    }

    let mut psi = Vec::with_capacity(w * h);
    let mut coords = Vec::with_capacity(w * h);
    for j in 0..h {
        for i in 0..w {
            let (x, y) = (g.x_full(i), g.y_full(j));
            coords.push((x, y));
            psi.push(problem.psi(x, y));
        }
    }
    let active = coincidence_set(&full, &psi, COIN_TOL);
    Ok(coords
        .into_iter()
        .zip(full)
        .zip(psi)
        .zip(active)
        .map(|((((x, y), u), psi), active)| FieldNode {
            x,
            y,
            u,
            psi,
            active,
        })
        .collect())
}

/// Writes `x,y,u,psi,active` with 17 significant digits.
pub fn write_field_csv<W: Write>(mut out: W, nodes: &[FieldNode]) -> Result<()> {
    writeln!(out, "x,y,u,psi,active")?;
    for n in nodes {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{}",
            n.x,
            n.y,
            n.u,
            n.psi,
            u8::from(n.active)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obstacle::{assemble_elliptic, ObstacleSpec, Problem};

    #[test]
    fn dirichlet_boundary() {
        let d = assemble_elliptic(&ObstacleSpec::new(Problem::Tent), 4).unwrap();
        let nodes = full_field(&d, &d.psi_vec).unwrap();
        assert_eq!(nodes.len(), 36);
        assert_eq!(nodes[0].u, 0.5);
        assert_eq!((nodes[0].x, nodes[0].y), (-1.0, -2.0));
        assert_eq!((nodes[35].x, nodes[35].y), (1.0, 2.0));
        assert!(nodes[7].active);
    }

    #[test]
    fn neumann_reconstruction_is_exact_for_linear_fields() {
        // u = 1 - x has outward derivative 1 on the left edge
        let spec = ObstacleSpec::new(Problem::TorsionNeumann { c: -5.0 });
        let d = assemble_elliptic(&spec, 4).unwrap();
        let u: Vec<f64> = (0..16).map(|k| 1.0 - d.grid.x(k % 4)).collect();
        let nodes = full_field(&d, &u).unwrap();
        // left edge, j = 2
        assert!((nodes[2 * 6].u - 1.0).abs() < 1e-14);
    }

    #[test]
    fn corner_rules_agree_on_square_cells() {
        // extrapolating along x then y equals y then x when dx = dy
        let mut spec = ObstacleSpec::new(Problem::TorsionNeumann { c: -5.0 });
        let d = assemble_elliptic(&spec, 4).unwrap();
        let u: Vec<f64> = (0..16).map(|k| (k * k) as f64 * 0.01).collect();
        let avg = full_field(&d, &u).unwrap()[0].u;
        spec.corner = CornerRule::XEdge;
        let dx = assemble_elliptic(&spec, 4).unwrap();
        let xe = full_field(&dx, &u).unwrap()[0].u;
        spec.corner = CornerRule::YEdge;
        let dy = assemble_elliptic(&spec, 4).unwrap();
        let ye = full_field(&dy, &u).unwrap()[0].u;
        assert!((xe - ye).abs() < 1e-14);
        assert!((avg - xe).abs() < 1e-14);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let d = assemble_elliptic(&ObstacleSpec::new(Problem::Tent), 2).unwrap();
        let nodes = full_field(&d, &d.psi_vec).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &nodes).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "x,y,u,psi,active");
        assert_eq!(lines.len(), 17);
        assert!(lines[1]
            .starts_with("-1.0000000000000000e0,-2.0000000000000000e0,5.0000000000000000e-1"));
    }
}
