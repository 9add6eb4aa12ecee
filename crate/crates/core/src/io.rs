//! CSV and legacy VTK input/output.

use std::io::{Read, Write};

use crate::fem::{ErrorRow, Mesh, ProblemKind, Solution};
use crate::geometry::{CellLabel, ConvexPolygon, Point};
use crate::Real;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
}

#[derive(Debug, serde::Deserialize)]
struct SeedRow {
    x: f64,
    y: f64,
}

/// Reads seeds from CSV with an `x,y` header.
pub fn read_seeds<T: Real, R: Read>(r: R) -> Result<Vec<Point<T>>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rdr.headers()?.clone();
    if header.len() != 2 || &header[0] != "x" || &header[1] != "y" {
        return Err(IoError::Parse { line: 1, msg: "expected header `x,y`".into() });
    }
    let mut out = Vec::new();
    for rec in rdr.deserialize::<SeedRow>() {
        let s = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            IoError::Parse { line, msg: e.to_string() }
        })?;
        if !(s.x.is_finite() && s.y.is_finite()) {
            return Err(IoError::Parse { line: out.len() as u64 + 2, msg: "non-finite coordinate".into() });
        }
        out.push(Point::new(T::lit(s.x), T::lit(s.y)));
    }
    Ok(out)
}

pub fn write_seeds<T: Real, W: Write>(w: W, seeds: &[Point<T>]) -> Result<(), IoError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "y"])?;
    for p in seeds {
        wr.write_record([p.x.to_f64_lossy().to_string(), p.y.to_f64_lossy().to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// Vertex lists, counter-clockwise, one row per vertex.
pub fn write_polygons<T: Real, W: Write>(w: W, polys: &[ConvexPolygon<T>]) -> Result<(), IoError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["cell", "vertex", "x", "y"])?;
    for (c, poly) in polys.iter().enumerate() {
        for (k, v) in poly.vertices().iter().enumerate() {
            wr.write_record([
                c.to_string(),
                k.to_string(),
                v.x.to_f64_lossy().to_string(),
                v.y.to_f64_lossy().to_string(),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Cell table of a mesh: label, seed and areas.
pub fn write_cells<T: Real, W: Write>(w: W, mesh: &Mesh<T>) -> Result<(), IoError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["cell", "label", "cx", "cy", "area", "domain_area"])?;
    for (k, c) in mesh.cells.iter().enumerate() {
        wr.write_record([
            k.to_string(),
            label_name(c.label).to_string(),
            c.center.x.to_f64_lossy().to_string(),
            c.center.y.to_f64_lossy().to_string(),
            c.polygon.area().to_f64_lossy().to_string(),
            c.domain.area().to_f64_lossy().to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn label_name(l: CellLabel) -> &'static str {
    match l {
        CellLabel::Interior => "interior",
        CellLabel::Cut => "cut",
        CellLabel::Ghost => "ghost",
        CellLabel::Exterior => "exterior",
    }
}

fn label_code(l: CellLabel) -> i32 {
    match l {
        CellLabel::Interior => 0,
        CellLabel::Cut => 1,
        CellLabel::Ghost => 2,
        CellLabel::Exterior => 3,
    }
}

/// Cell outlines as legacy VTK polydata with the cell label as cell data.
pub fn write_mesh_vtk<T: Real, W: Write>(mut w: W, mesh: &Mesh<T>) -> Result<(), IoError> {
    let polys: Vec<_> = mesh.cells.iter().filter(|c| c.label != CellLabel::Exterior).collect();
    let npts: usize = polys.iter().map(|c| c.polygon.len()).sum();
    writeln!(w, "# vtk DataFile Version 3.0\nmollified mesh\nASCII\nDATASET POLYDATA")?;
    writeln!(w, "POINTS {npts} double")?;
    for c in &polys {
        for v in c.polygon.vertices() {
            writeln!(w, "{} {} 0", v.x.to_f64_lossy(), v.y.to_f64_lossy())?;
        }
    }
    writeln!(w, "POLYGONS {} {}", polys.len(), npts + polys.len())?;
    let mut off = 0;
    for c in &polys {
        let n = c.polygon.len();
        let ids: Vec<String> = (off..off + n).map(|i| i.to_string()).collect();
        writeln!(w, "{n} {}", ids.join(" "))?;
        off += n;
    }
    writeln!(w, "CELL_DATA {}\nSCALARS label int 1\nLOOKUP_TABLE default", polys.len())?;
    for c in &polys {
        writeln!(w, "{}", label_code(c.label))?;
    }
    Ok(())
}

/// Solution sampled at the corners of the integration triangles of every
/// domain cell, as legacy VTK unstructured grid.
pub fn write_solution_vtk<T: Real, W: Write>(mut w: W, mesh: &Mesh<T>, sol: &Solution<T>) -> Result<(), IoError> {
    let mut pts = Vec::new();
    for k in mesh.domain_cells() {
        for t in mesh.integration_triangles(k) {
            for (r, s) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)] {
                pts.push(t.map(T::lit(r), T::lit(s)).0);
            }
        }
    }
    let ntri = pts.len() / 3;
    writeln!(w, "# vtk DataFile Version 3.0\nmollified solution\nASCII\nDATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", pts.len())?;
    for p in &pts {
        writeln!(w, "{} {} 0", p.x.to_f64_lossy(), p.y.to_f64_lossy())?;
    }
    writeln!(w, "CELLS {ntri} {}", 4 * ntri)?;
    for t in 0..ntri {
        writeln!(w, "3 {} {} {}", 3 * t, 3 * t + 1, 3 * t + 2)?;
    }
    writeln!(w, "CELL_TYPES {ntri}")?;
    for _ in 0..ntri {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {}", pts.len())?;
    let vals: Vec<_> = pts.iter().map(|p| sol.eval(mesh, *p).0).collect();
    if sol.dofs.ncomp == 1 {
        writeln!(w, "SCALARS u double 1\nLOOKUP_TABLE default")?;
        for v in &vals {
            writeln!(w, "{}", v[0].to_f64_lossy())?;
        }
    } else {
        writeln!(w, "VECTORS u double")?;
        for v in &vals {
            writeln!(w, "{} {} 0", v[0].to_f64_lossy(), v[1].to_f64_lossy())?;
        }
    }
    Ok(())
}

/// Point samples `x,y,u[,v]`.
pub fn write_solution_csv<T: Real, W: Write>(
    w: W,
    mesh: &Mesh<T>,
    sol: &Solution<T>,
    points: &[Point<T>],
    kind: &ProblemKind<T>,
) -> Result<(), IoError> {
    let mut wr = csv::Writer::from_writer(w);
    let two = kind.components() == 2;
    if two {
        wr.write_record(["x", "y", "u", "v"])?;
    } else {
        wr.write_record(["x", "y", "u"])?;
    }
    for p in points {
        let (u, _) = sol.eval(mesh, *p);
        let mut rec = vec![p.x.to_f64_lossy().to_string(), p.y.to_f64_lossy().to_string(), u[0].to_f64_lossy().to_string()];
        if two {
            rec.push(u[1].to_f64_lossy().to_string());
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub const ERROR_COLUMNS: [&str; 7] = ["n_c", "h", "L2", "H1_semi", "energy", "n_dof", "wall_time_ms"];

pub fn write_errors<W: Write>(w: W, rows: &[ErrorRow]) -> Result<(), IoError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(ERROR_COLUMNS)?;
    for r in rows {
        wr.write_record([
            r.n_c.to_string(),
            r.h.to_string(),
            r.l2.to_string(),
            r.h1.to_string(),
            r.energy.to_string(),
            r.n_dof.to_string(),
            r.wall_time_ms.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_round_trip() {
        let seeds = vec![Point::new(0.25, 0.5), Point::new(1e-3, -2.0)];
        let mut buf = Vec::new();
        write_seeds(&mut buf, &seeds).unwrap();
        assert!(buf.starts_with(b"x,y\n"));
        let back: Vec<Point<f64>> = read_seeds(buf.as_slice()).unwrap();
        assert_eq!(back, seeds);
    }

    #[test]
    fn bad_seed_files() {
        assert!(read_seeds::<f64, _>("a,b\n1,2\n".as_bytes()).is_err());
        assert!(matches!(read_seeds::<f64, _>("x,y\n1,oops\n".as_bytes()), Err(IoError::Parse { .. })));
        assert!(read_seeds::<f64, _>("x,y\n1,inf\n".as_bytes()).is_err());
    }

    #[test]
    fn error_table_header() {
        let mut buf = Vec::new();
        let row = ErrorRow { n_c: 4, h: 0.5, l2: 1e-3, h1: 1e-2, energy: 1e-2, n_dof: 12, wall_time_ms: 0.0 };
        write_errors(&mut buf, &[row]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next().unwrap(), "n_c,h,L2,H1_semi,energy,n_dof,wall_time_ms");
        assert_eq!(s.lines().nth(1).unwrap(), "4,0.5,0.001,0.01,0.01,12,0");
    }
}
