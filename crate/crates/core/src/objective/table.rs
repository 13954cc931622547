use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{Objective, ObjectiveVector};
use crate::error::{Error, Result};
use crate::space::{DesignSpace, DesignVector};

/// Objective values looked up from an externally simulated dataset.
///
/// CSV layout: a header naming the variables and objective columns, then one
/// row per design vector with option labels (not indices) in the variable
/// columns.
#[derive(Debug, Clone)]
pub struct TableBackend {
    space: DesignSpace,
    objective_names: Vec<String>,
    rows: HashMap<DesignVector, ObjectiveVector>,
}

impl TableBackend {
    pub fn from_rows(
        space: DesignSpace,
        objective_names: Vec<String>,
        rows: impl IntoIterator<Item = (DesignVector, ObjectiveVector)>,
    ) -> Self {
        TableBackend {
            space,
            objective_names,
            rows: rows.into_iter().collect(),
        }
    }

    pub fn from_path(
        space: &DesignSpace,
        path: &Path,
        objective_columns: Option<&[String]>,
    ) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(space, file, objective_columns)
    }

    /// Reads a table. With `objective_columns = None` every non-variable
    /// column is an objective.
    pub fn from_reader<R: Read>(
        space: &DesignSpace,
        reader: R,
        objective_columns: Option<&[String]>,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        let column = |name: &str| header.iter().position(|h| h == name);
        let var_cols = space
            .variables()
            .iter()
            .map(|v| {
                column(&v.name).ok_or_else(|| {
                    Error::Config(vec![format!("table has no column for variable `{}`", v.name)])
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let objective_names: Vec<String> = match objective_columns {
            Some(cols) => cols.to_vec(),
            None => header
                .iter()
                .filter(|h| space.position(h).is_none())
                .map(String::from)
                .collect(),
        };
        if objective_names.is_empty() {
            return Err(Error::Config(vec!["table declares no objective columns".into()]));
        }
        let obj_cols = objective_names
            .iter()
            .map(|n| {
                column(n).ok_or_else(|| Error::Config(vec![format!("table has no column `{n}`")]))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rows = HashMap::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let labels: Vec<&str> = var_cols.iter().map(|&c| &record[c]).collect();
            let v = space.vector_from_labels(&labels)?;
            let values = obj_cols
                .iter()
                .map(|&c| {
                    record[c].trim().parse::<f64>().map_err(|_| {
                        Error::Config(vec![format!(
                            "row {}: `{}` is not a number",
                            line + 2,
                            &record[c]
                        )])
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.insert(v, ObjectiveVector::new(values));
        }
        Ok(TableBackend {
            space: space.clone(),
            objective_names,
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl Objective for TableBackend {
    fn n_objectives(&self) -> usize {
        self.objective_names.len()
    }

    fn objective_names(&self) -> Vec<String> {
        self.objective_names.clone()
    }

    fn evaluate(&self, v: &DesignVector) -> Result<ObjectiveVector> {
        self.rows
            .get(v)
            .cloned()
            .ok_or_else(|| Error::Unevaluated(self.space.describe(v)))
    }
}

/// Writes rows in the table-backend layout. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_table_csv<'a, W: Write>(
    space: &DesignSpace,
    objective_names: &[String],
    rows: impl IntoIterator<Item = (&'a DesignVector, &'a ObjectiveVector)>,
    writer: W,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let header: Vec<&str> = space
        .variables()
        .iter()
        .map(|v| v.name.as_str())
        .chain(objective_names.iter().map(String::as_str))
        .collect();
    w.write_record(&header)?;
    for (v, f) in rows {
        let mut record: Vec<String> = space.labels(v).into_iter().map(String::from).collect();
        record.extend(f.values().iter().map(|x| x.to_string()));
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{ElementTag, FieldTag, VariableSpec};

    fn space() -> DesignSpace {
        DesignSpace::new(vec![
            VariableSpec::new("a", ["lo", "hi"], ElementTag::Other, FieldTag::Other),
            VariableSpec::new("b", ["x", "y"], ElementTag::Other, FieldTag::Other),
        ])
        .unwrap()
    }

    #[test]
    fn present_row_verbatim_missing_row_errors() {
        let csv = "b,a,energy,comfort\nx,lo,1.5,20\ny,hi,0.25,40\n";
        let t = TableBackend::from_reader(&space(), csv.as_bytes(), None).unwrap();
        assert_eq!(t.objective_names(), vec!["energy", "comfort"]);
        let f = t.evaluate(&DesignVector::new(vec![1, 1])).unwrap();
        assert_eq!(f.values(), &[0.25, 40.0]);
        let err = t.evaluate(&DesignVector::new(vec![0, 1])).unwrap_err();
        assert!(matches!(err, Error::Unevaluated(_)));
        assert!(err.to_string().contains("lo, y"));
    }

    #[test]
    fn explicit_objective_columns_skip_extras() {
        let csv = "a,b,f1,classification\nlo,x,3,global\n";
        let cols = vec!["f1".to_string()];
        let t = TableBackend::from_reader(&space(), csv.as_bytes(), Some(&cols)).unwrap();
        assert_eq!(t.evaluate(&DesignVector::new(vec![0, 0])).unwrap().values(), &[3.0]);
    }

    #[test]
    fn missing_variable_column_is_an_error() {
        let csv = "a,f1\nlo,3\n";
        assert!(TableBackend::from_reader(&space(), csv.as_bytes(), None).is_err());
    }
}
