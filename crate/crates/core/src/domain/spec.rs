//! JSON domain-spec files and the named built-in domains.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Ccw,
    Cw,
}

/// One boundary component as written in a domain-spec file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ComponentSpec {
    Polyline {
        vertices: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        orientation: Option<Orientation>,
    },
    Circle {
        center: [f64; 2],
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        orientation: Option<Orientation>,
    },
    Slit {
        endpoints: [[f64; 2]; 2],
    },
}

/// Serializable description of a planar domain; the first component is the outer one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub name: String,
    pub base_point: [f64; 2],
    pub components: Vec<ComponentSpec>,
}

pub(crate) fn pt(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

pub(crate) fn arr(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl DomainSpec {
    /// Hex SHA-256 of the canonical JSON encoding; used as a cache key component.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("domain spec serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Unit disk.
    pub fn disk() -> Self {
        DomainSpec {
            name: "disk".into(),
            base_point: [0.0, 0.0],
            components: vec![unit_circle()],
        }
    }

    /// Annulus `{mu < |z| < 1}`.
    pub fn annulus(mu: f64) -> Self {
        DomainSpec {
            name: format!("annulus({mu})"),
            base_point: [(1.0 + mu) / 2.0, 0.0],
            components: vec![
                unit_circle(),
                ComponentSpec::Circle {
                    center: [0.0, 0.0],
                    radius: mu,
                    orientation: Some(Orientation::Cw),
                },
            ],
        }
    }

    /// Unit disk with the segment `[0, 1]` removed.
    pub fn slit_disk() -> Self {
        DomainSpec {
            name: "slit_disk".into(),
            base_point: [-0.5, 0.0],
            components: vec![
                unit_circle(),
                ComponentSpec::Slit {
                    endpoints: [[0.0, 0.0], [1.0, 0.0]],
                },
            ],
        }
    }

    /// Unit disk minus closed disks `(center, radius)`.
    pub fn circle_domain(holes: &[(C64, f64)]) -> Self {
        let mut components = vec![unit_circle()];
        components.extend(holes.iter().map(|(c, r)| ComponentSpec::Circle {
            center: arr(*c),
            radius: *r,
            orientation: Some(Orientation::Cw),
        }));
        let name = format!(
            "circle_domain({})",
            holes
                .iter()
                .map(|(c, r)| format!("{},{},{}", c.re, c.im, r))
                .collect::<Vec<_>>()
                .join(",")
        );
        DomainSpec {
            name,
            base_point: [0.0, 0.0],
            components,
        }
    }

    /// Interior of a closed polyline.
    pub fn jordan(vertices: &[C64]) -> Self {
        let n = vertices.len().max(1) as f64;
        let centroid = vertices.iter().sum::<C64>() / n;
        DomainSpec {
            name: format!(
                "jordan({})",
                vertices
                    .iter()
                    .map(|v| format!("{},{}", v.re, v.im))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            base_point: arr(centroid),
            components: vec![ComponentSpec::Polyline {
                vertices: vertices.iter().map(|v| arr(*v)).collect(),
                orientation: Some(Orientation::Ccw),
            }],
        }
    }

    /// The square `[-1/2, 1/2]^2`.
    pub fn square() -> Self {
        let mut spec = DomainSpec::jordan(&[
            C64::new(-0.5, -0.5),
            C64::new(0.5, -0.5),
            C64::new(0.5, 0.5),
            C64::new(-0.5, 0.5),
        ]);
        spec.name = "square".into();
        spec
    }

    /// Resolve a built-in name such as `disk`, `annulus(0.3)`, `slit_disk`,
    /// `circle_domain(0.4,0,0.2)`, `jordan(x1,y1,x2,y2,...)` or `square`.
    pub fn builtin(name: &str) -> Result<Self> {
        let name = name.trim();
        let (head, args) = match name.find('(') {
            Some(open) => {
                let close = name
                    .rfind(')')
                    .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in `{name}`")))?;
                let inner = &name[open + 1..close];
                let args = inner
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(format!("`{s}` in `{name}`: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (&name[..open], args)
            }
            None => (name, Vec::new()),
        };
        let spec = match (head, args.len()) {
            ("disk", 0) => DomainSpec::disk(),
            ("slit_disk", 0) => DomainSpec::slit_disk(),
            ("square", 0) => DomainSpec::square(),
            ("annulus", 1) => DomainSpec::annulus(args[0]),
            ("circle_domain", n) if n % 3 == 0 => {
                let holes: Vec<_> = args
                    .chunks(3)
                    .map(|c| (C64::new(c[0], c[1]), c[2]))
                    .collect();
                DomainSpec::circle_domain(&holes)
            }
            ("jordan", n) if n >= 6 && n % 2 == 0 => {
                let v: Vec<_> = args.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
                DomainSpec::jordan(&v)
            }
            _ => return Err(Error::Parse(format!("unknown built-in domain `{name}`"))),
        };
        Ok(spec)
    }
}

fn unit_circle() -> ComponentSpec {
    ComponentSpec::Circle {
        center: [0.0, 0.0],
        radius: 1.0,
        orientation: Some(Orientation::Ccw),
    }
}
