use std::path::Path;

use super::binarize::Binarizer;
use super::{Instance, Schema, DEFAULT_CALIBRATION_LEN};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FileOptions {
    pub bits_per_attribute: u32,
    pub calibration_len: usize,
    /// Forced delimiter; auto-detected from the header when `None`.
    pub delimiter: Option<u8>,
}

impl Default for FileOptions {
    fn default() -> Self {
        FileOptions {
            bits_per_attribute: 1,
            calibration_len: DEFAULT_CALIBRATION_LEN,
            delimiter: None,
        }
    }
}

/// A delimited file loaded and binarized in full.
#[derive(Debug, Clone)]
pub struct FileStream {
    binarizer: Binarizer,
    instances: std::vec::IntoIter<Instance>,
}

impl FileStream {
    pub fn schema(&self) -> &Schema {
        self.binarizer.schema()
    }

    pub fn binarizer(&self) -> &Binarizer {
        &self.binarizer
    }
}

impl Iterator for FileStream {
    type Item = Instance;

    fn next(&mut self) -> Option<Instance> {
        self.instances.next()
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.instances.size_hint()
    }
}

impl ExactSizeIterator for FileStream {}

fn detect_delimiter(header: &str) -> u8 {
    let semis = header.matches(';').count();
    let commas = header.matches(',').count();
    if semis > commas {
        b';'
    } else {
        b','
    }
}

/// Reads a header-first delimited table whose last column is a two-valued
/// class. The first class value seen becomes class1 (f = 1).
pub fn file_stream(path: impl AsRef<Path>, options: &FileOptions) -> Result<FileStream> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header_line = text.lines().next().unwrap_or_default();
    let delimiter = options
        .delimiter
        .unwrap_or_else(|| detect_delimiter(header_line));

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    if header.len() < 2 {
        return Err(Error::UnsupportedDataset(
            "need at least one attribute column and a class column".into(),
        ));
    }
    let dim = header.len() - 1;
    let attribute_names: Vec<String> = header.iter().take(dim).map(str::to_string).collect();

    let mut classes: Vec<String> = Vec::with_capacity(2);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Row {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != header.len() {
            return Err(Error::Row {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let mut values = Vec::with_capacity(dim);
        for (k, field) in record.iter().take(dim).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Row {
                line,
                message: format!("attribute `{}`: cannot parse `{field}`", attribute_names[k]),
            })?;
            values.push(v);
        }
        let class = record.get(dim).unwrap_or_default();
        let label = match classes.iter().position(|c| c == class) {
            Some(0) => 1,
            Some(_) => 0,
            None if classes.len() < 2 => {
                classes.push(class.to_string());
                if classes.len() == 1 {
                    1
                } else {
                    0
                }
            }
            None => return Err(Error::UnsupportedDataset(format!(
                "line {line}: third class value `{class}` (only two-class streams are supported)"
            ))),
        };
        rows.push(values);
        labels.push(label);
    }

    while classes.len() < 2 {
        classes.push(format!("unseen{}", classes.len()));
    }
    log::info!(
        "{}: class `{}` -> 1, class `{}` -> 0",
        path.display(),
        classes[0],
        classes[1]
    );

    let class_labels = [classes[0].clone(), classes[1].clone()];
    let binarizer = if rows.is_empty() {
        let codings = vec![super::AttributeCoding::Binary; dim];
        Binarizer::from_codings(codings, &attribute_names, class_labels)?
    } else {
        let cal_len = options.calibration_len.clamp(1, rows.len());
        Binarizer::fit(
            &rows[..cal_len],
            &attribute_names,
            class_labels,
            options.bits_per_attribute,
        )?
    };
    let instances: Vec<Instance> = rows
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (values, label))| Instance::new(binarizer.encode(values), label, i as u64))
        .collect();
    Ok(FileStream {
        binarizer,
        instances: instances.into_iter(),
    })
}
