//! CSV dumps of paths: one file per path, or a long-format ensemble file
//! with a `path_id` column. Floats are written in shortest round-trip form.

use std::io::{self, Write};

use crate::path::semimartingale::SemimartingalePath;

fn header(dim: usize, with_path_id: bool) -> String {
    let mut cols: Vec<String> = Vec::new();
    if with_path_id {
        cols.push("path_id".into());
    }
    cols.push("t".into());
    for prefix in ["x", "m", "a"] {
        for c in 1..=dim {
            cols.push(format!("{prefix}_{c}"));
        }
    }
    cols.join(",")
}

fn write_rows<W: Write>(w: &mut W, path: &SemimartingalePath, path_id: Option<usize>) -> io::Result<()> {
    let d = path.dim();
    for j in 0..path.len() {
        let mut row = String::new();
        if let Some(id) = path_id {
            row.push_str(&format!("{id},"));
        }
        row.push_str(&format!("{}", path.grid().times()[j]));
        for traj in [path.x(), path.m(), path.a()] {
            for c in 0..d {
                row.push_str(&format!(",{}", traj.coord(j, c)));
            }
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// `t, x_1..x_d, m_1..m_d, a_1..a_d` for a single path.
pub fn write_path_csv<W: Write>(w: &mut W, path: &SemimartingalePath) -> io::Result<()> {
    writeln!(w, "{}", header(path.dim(), false))?;
    write_rows(w, path, None)
}

/// Long-format ensemble dump with a leading `path_id` column.
pub fn write_ensemble_csv<W: Write>(w: &mut W, paths: &[SemimartingalePath]) -> io::Result<()> {
    if paths.is_empty() {
        return Ok(());
    }
    writeln!(w, "{}", header(paths[0].dim(), true))?;
    for (id, p) in paths.iter().enumerate() {
        write_rows(w, p, Some(id))?;
    }
    Ok(())
}
