//! Legacy ASCII VTK output for triangle meshes.

use std::io::{self, Write};

use super::Mesh;

/// A named scalar field attached to points or cells.
pub struct VtkField<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
}

pub fn write_vtk<W: Write>(
    out: &mut W,
    mesh: &Mesh,
    title: &str,
    point_data: &[VtkField<'_>],
    cell_data: &[VtkField<'_>],
) -> io::Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.num_vertices())?;
    for p in mesh.vertices() {
        writeln!(out, "{:e} {:e} 0", p[0], p[1])?;
    }
    let nt = mesh.num_triangles();
    writeln!(out, "CELLS {} {}", nt, 4 * nt)?;
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(out, "5")?;
    }
    if !point_data.is_empty() {
        writeln!(out, "POINT_DATA {}", mesh.num_vertices())?;
        for f in point_data {
            write_scalars(out, f, mesh.num_vertices())?;
        }
    }
    if !cell_data.is_empty() {
        writeln!(out, "CELL_DATA {nt}")?;
        for f in cell_data {
            write_scalars(out, f, nt)?;
        }
    }
    Ok(())
}

fn write_scalars<W: Write>(out: &mut W, f: &VtkField<'_>, n: usize) -> io::Result<()> {
    if f.values.len() != n {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("field {} has {} values, expected {n}", f.name, f.values.len()),
        ));
    }
    writeln!(out, "SCALARS {} double 1", f.name)?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for v in f.values {
        writeln!(out, "{v:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_sections_in_order() {
        let m = Mesh::unit_square_two_triangles();
        let mut buf = Vec::new();
        let u = [0.0, 1.0, 2.0, 3.0];
        let eta = [0.5, 0.25];
        write_vtk(
            &mut buf,
            &m,
            "test",
            &[VtkField { name: "u", values: &u }],
            &[VtkField { name: "eta", values: &eta }],
        )
        .unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[4], "POINTS 4 double");
        assert!(s.contains("CELLS 2 8\n3 1 2 0\n"));
        assert!(s.contains("POINT_DATA 4\nSCALARS u double 1"));
        assert!(s.contains("CELL_DATA 2\nSCALARS eta double 1"));
    }
}
