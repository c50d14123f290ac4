//! Where the session's label map comes from: a file on disk or an HTTP
//! segmentation service.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::http::HttpClient;
use crate::image::{ImageBuffer, LabelMap};

pub trait SegmentationProvider: Send + Sync {
    fn segment(&self, img: &ImageBuffer) -> Result<LabelMap>;
}

/// Loads a label-map PNG and checks it against the image size. Indices are kept as stored.
pub fn from_fixture(path: impl AsRef<Path>, dims: (u32, u32)) -> Result<LabelMap> {
    let map = LabelMap::load(path)?;
    map.check_dimensions(dims)?;
    Ok(map)
}

#[derive(Debug, Clone)]
pub struct FixtureSegmentation {
    pub path: PathBuf,
}

impl SegmentationProvider for FixtureSegmentation {
    fn segment(&self, img: &ImageBuffer) -> Result<LabelMap> {
        from_fixture(&self.path, img.dimensions())
    }
}

/// Run-length reply of a segmentation service: one list of `[start, length]`
/// runs over row-major pixel offsets per mask, in response order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleMasks {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    pub masks: Vec<Vec<[u64; 2]>>,
}

/// Paints masks in order, so a later mask wins where two overlap. Returns the
/// map and the number of pixels that were claimed more than once.
pub fn label_map_from_rle(dims: (u32, u32), reply: &RleMasks) -> Result<(LabelMap, usize)> {
    if let (Some(w), Some(h)) = (reply.width, reply.height) {
        if (w, h) != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: (w, h),
            });
        }
    }
    if reply.masks.len() > u16::MAX as usize {
        return Err(Error::MalformedResponse(format!("{} masks exceed the index range", reply.masks.len())));
    }
    let n = dims.0 as u64 * dims.1 as u64;
    let mut labels = vec![0u16; n as usize];
    let mut overlaps = 0;
    for (i, runs) in reply.masks.iter().enumerate() {
        let index = i as u16 + 1;
        for &[start, len] in runs {
            let end = start.checked_add(len).filter(|&e| e <= n).ok_or_else(|| {
                Error::MalformedResponse(format!("run [{start}, {len}] of mask {index} leaves the image"))
            })?;
            for l in &mut labels[start as usize..end as usize] {
                if *l != 0 && *l != index {
                    overlaps += 1;
                }
                *l = index;
            }
        }
    }
    Ok((LabelMap::new(dims.0, dims.1, labels)?, overlaps))
}

/// Renumbers the distinct nonzero labels of `map` to `1..=k` in ascending order.
pub fn compact_indices(map: &LabelMap) -> LabelMap {
    let mapping: BTreeMap<u16, u16> = map
        .indices()
        .into_iter()
        .enumerate()
        .map(|(i, idx)| (idx as u16, i as u16 + 1))
        .collect();
    let labels = map.labels().iter().map(|l| if *l == 0 { 0 } else { mapping[l] }).collect();
    LabelMap::new(map.width(), map.height(), labels).expect("same dimensions")
}

/// HTTP segmentation service. The image goes out as `image/png`; the reply
/// is either a label-map PNG or an [`RleMasks`] JSON document.
#[derive(Debug, Clone)]
pub struct RemoteSegmentation {
    endpoint: String,
    client: HttpClient,
}

impl RemoteSegmentation {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, retries: u32) -> Self {
        Self {
            endpoint: endpoint.into(),
            client: HttpClient::new(timeout, retries, Duration::from_millis(200)),
        }
    }

    pub fn with_client(endpoint: impl Into<String>, client: HttpClient) -> Self {
        Self {
            endpoint: endpoint.into(),
            client,
        }
    }
}

impl SegmentationProvider for RemoteSegmentation {
    fn segment(&self, img: &ImageBuffer) -> Result<LabelMap> {
        from_remote(img, &self.endpoint, &self.client)
    }
}

pub fn from_remote(img: &ImageBuffer, endpoint: &str, client: &HttpClient) -> Result<LabelMap> {
    let reply = client.post(endpoint, &[], "image/png", &img.encode_png())?;
    if reply.is_png() {
        let map = LabelMap::decode_png(&reply.body).map_err(|e| Error::MalformedResponse(e.to_string()))?;
        map.check_dimensions(img.dimensions())?;
        return Ok(compact_indices(&map));
    }
    if reply.body.iter().all(u8::is_ascii_whitespace) {
        return LabelMap::empty(img.width(), img.height());
    }
    let parsed: RleMasks =
        serde_json::from_slice(&reply.body).map_err(|e| Error::MalformedResponse(e.to_string()))?;
    let (map, overlaps) = label_map_from_rle(img.dimensions(), &parsed)?;
    if overlaps > 0 {
        log::info!("segmentation reply: {overlaps} overlapping pixels resolved to the later mask");
    }
    Ok(map)
}
