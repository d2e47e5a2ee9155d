//! Minimal standalone reader for the legacy ASCII VTK files the CLI writes.
//! Included by the CLI tests with `mod`.

use std::collections::BTreeMap;

#[derive(Debug, Default)]
pub struct Grid {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub point_data: BTreeMap<String, Vec<f64>>,
    pub cell_data: BTreeMap<String, Vec<f64>>,
}

enum Section {
    Point,
    Cell,
}

fn number<T: std::str::FromStr>(token: Option<&str>, what: &str) -> Result<T, String> {
    token
        .ok_or_else(|| format!("missing {what}"))?
        .parse()
        .map_err(|_| format!("malformed {what}"))
}

pub fn parse(text: &str) -> Result<Grid, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if !header.starts_with("# vtk DataFile Version") {
        return Err(format!("bad header `{header}`"));
    }
    lines.next().ok_or("missing title")?;
    if lines.next() != Some("ASCII") {
        return Err("only ASCII files are supported".into());
    }
    if lines.next() != Some("DATASET UNSTRUCTURED_GRID") {
        return Err("expected an unstructured grid".into());
    }
    let mut tokens = lines.flat_map(str::split_whitespace);
    let mut grid = Grid::default();
    let mut section = None;
    while let Some(keyword) = tokens.next() {
        match keyword {
            "POINTS" => {
                let n: usize = number(tokens.next(), "point count")?;
                tokens.next();
                for _ in 0..n {
                    let mut p = [0.0; 3];
                    for c in &mut p {
                        *c = number(tokens.next(), "coordinate")?;
                    }
                    grid.points.push(p);
                }
            }
            "CELLS" => {
                let n: usize = number(tokens.next(), "cell count")?;
                let size: usize = number(tokens.next(), "cell list size")?;
                let mut read = 0;
                for _ in 0..n {
                    let k: usize = number(tokens.next(), "cell size")?;
                    let ids = (0..k)
                        .map(|_| number(tokens.next(), "cell index"))
                        .collect::<Result<Vec<usize>, _>>()?;
                    if ids.iter().any(|&i| i >= grid.points.len()) {
                        return Err("cell index out of range".into());
                    }
                    read += k + 1;
                    grid.cells.push(ids);
                }
                if read != size {
                    return Err(format!("cell list size {size} does not match {read}"));
                }
            }
            "CELL_TYPES" => {
                let n: usize = number(tokens.next(), "cell type count")?;
                for _ in 0..n {
                    grid.cell_types.push(number(tokens.next(), "cell type")?);
                }
            }
            "POINT_DATA" => {
                number::<usize>(tokens.next(), "point data count")?;
                section = Some(Section::Point);
            }
            "CELL_DATA" => {
                number::<usize>(tokens.next(), "cell data count")?;
                section = Some(Section::Cell);
            }
            "SCALARS" => {
                let name = tokens.next().ok_or("missing array name")?.to_string();
                tokens.next();
                if tokens.next() != Some("1") {
                    return Err("only single-component scalars are supported".into());
                }
                if (tokens.next(), tokens.next()) != (Some("LOOKUP_TABLE"), Some("default")) {
                    return Err("missing lookup table".into());
                }
                let (n, target) = match section {
                    Some(Section::Point) => (grid.points.len(), &mut grid.point_data),
                    Some(Section::Cell) => (grid.cells.len(), &mut grid.cell_data),
                    None => return Err("scalars outside a data section".into()),
                };
                let values = (0..n)
                    .map(|_| number(tokens.next(), "scalar"))
                    .collect::<Result<Vec<f64>, _>>()?;
                target.insert(name, values);
            }
            other => return Err(format!("unexpected keyword `{other}`")),
        }
    }
    if grid.cell_types.len() != grid.cells.len() {
        return Err("cell type count differs from cell count".into());
    }
    Ok(grid)
}
