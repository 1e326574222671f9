//! Rendering of command results as CSV or JSON.

use std::path::Path;

use serde::Serialize;
use softguide::resonance::{GoldenRule, ResonancePole};

use crate::commands::SweepRow;
use crate::config::Format;
use crate::error::Result;

pub fn csv_table<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// A result that can be written in either format.
pub trait Render {
    fn csv(&self) -> Result<String>;
    fn json(&self) -> Result<String>;

    fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }
}

impl<T: Serialize> Render for Vec<T> {
    fn csv(&self) -> Result<String> {
        csv_table(self)
    }
    fn json(&self) -> Result<String> {
        json(self)
    }
}

#[derive(Serialize)]
struct PoleRow {
    n: usize,
    rho: f64,
    re_z: f64,
    im_z: f64,
    gamma_leading: f64,
    gamma: f64,
    residual: f64,
    iters: usize,
    trap_energy: f64,
    segment: usize,
    regime_norm: f64,
}

impl Render for ResonancePole {
    fn csv(&self) -> Result<String> {
        let r = SweepRow::from(self);
        csv_table(&[PoleRow {
            n: self.n,
            rho: r.rho,
            re_z: r.re_z,
            im_z: r.im_z,
            gamma_leading: r.gamma_leading,
            gamma: r.gamma,
            residual: r.residual,
            iters: r.iters,
            trap_energy: self.trap_energy,
            segment: self.segment,
            regime_norm: self.regime_norm,
        }])
    }
    fn json(&self) -> Result<String> {
        json(self)
    }
}

#[derive(Serialize)]
struct ChannelRow {
    channel: String,
    threshold: Option<f64>,
    momentum: Option<f64>,
    overlap: f64,
    cosine: f64,
    g_imag: Option<f64>,
}

impl Render for GoldenRule {
    /// One row per open channel and a `total` row carrying all three routes.
    fn csv(&self) -> Result<String> {
        let mut rows: Vec<ChannelRow> = self
            .channels
            .iter()
            .map(|c| ChannelRow {
                channel: c.channel.to_string(),
                threshold: Some(c.threshold),
                momentum: Some(c.momentum),
                overlap: c.overlap,
                cosine: c.cosine,
                g_imag: None,
            })
            .collect();
        rows.push(ChannelRow {
            channel: "total".into(),
            threshold: None,
            momentum: None,
            overlap: self.overlap,
            cosine: self.cosine,
            g_imag: Some(self.g_imag),
        });
        csv_table(&rows)
    }
    fn json(&self) -> Result<String> {
        json(self)
    }
}

/// Writes `<dir>/<stem>.<ext>` for every requested format.
pub fn write_all<R: Render + ?Sized>(value: &R, dir: &Path, stem: &str, formats: &[Format]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for f in formats {
        let ext = match f {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        std::fs::write(dir.join(format!("{stem}.{ext}")), value.render(*f)?)?;
    }
    Ok(())
}
