#!/usr/bin/env python3
# Copyright 2026 The wxforge Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Embedding extractor for `wxforge embed`.

Reads one image path per line from --images and writes a WXE1 file to --out.
Row ids are the image file stems. Configure it as, for example:

    extractor.fid = "python3 tools/reference_extractor.py --space inception-pool3 --images {input_list} --out {output}"
    extractor.cmmd = "python3 tools/reference_extractor.py --space clip-image --images {input_list} --out {output}"

inception-pool3 is torchvision's Inception v3 with the classifier removed
(2048-d, 299×299 bilinear resize, ImageNet normalization). Its weights are
not the TF-ported FID network, so absolute values differ from published FID
numbers. clip-image is the CLIP ViT-L/14 image tower at 336 px (768-d), with
the Hugging Face processor's resize and center crop.
"""

import argparse
import os
import struct
import sys
from pathlib import Path

import numpy as np

SPACES = {"inception-pool3": 2048, "clip-image": 768}
CLIP_CHECKPOINT = "openai/clip-vit-large-patch14-336"


def write_wxe(path, rows, ids, tag):
    rows = np.ascontiguousarray(rows, dtype="<f4")
    if not np.isfinite(rows).all():
        raise ValueError("non-finite embedding values")
    out = bytearray(b"WXE1")
    out += struct.pack("<IIQ", 1, rows.shape[1], rows.shape[0])
    t = tag.encode("utf-8")
    out += struct.pack("<H", len(t)) + t
    out += rows.tobytes()
    for i in ids:
        b = i.encode("utf-8")
        out += struct.pack("<H", len(b)) + b
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(out)
    os.replace(tmp, path)


def batches(items, size):
    for i in range(0, len(items), size):
        yield items[i : i + size]


def inception_rows(paths, batch, device, random_weights):
    import torch
    from PIL import Image
    from torchvision import models, transforms

    weights = None if random_weights else models.Inception_V3_Weights.IMAGENET1K_V1
    net = models.inception_v3(weights=weights, aux_logits=True, init_weights=random_weights)
    net.fc = torch.nn.Identity()
    net.eval().to(device)
    prep = transforms.Compose(
        [
            transforms.Resize((299, 299), interpolation=transforms.InterpolationMode.BILINEAR),
            transforms.ToTensor(),
            transforms.Normalize([0.485, 0.456, 0.406], [0.229, 0.224, 0.225]),
        ]
    )
    out = []
    with torch.no_grad():
        for chunk in batches(paths, batch):
            x = torch.stack([prep(Image.open(p).convert("RGB")) for p in chunk]).to(device)
            out.append(net(x).cpu().numpy())
    return np.concatenate(out)


def clip_rows(paths, batch, device):
    import torch
    from PIL import Image
    from transformers import CLIPImageProcessor, CLIPVisionModelWithProjection

    proc = CLIPImageProcessor.from_pretrained(CLIP_CHECKPOINT)
    net = CLIPVisionModelWithProjection.from_pretrained(CLIP_CHECKPOINT).eval().to(device)
    out = []
    with torch.no_grad():
        for chunk in batches(paths, batch):
            x = proc(images=[Image.open(p).convert("RGB") for p in chunk], return_tensors="pt")
            out.append(net(pixel_values=x["pixel_values"].to(device)).image_embeds.cpu().numpy())
    return np.concatenate(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--images", required=True, help="file with one image path per line")
    ap.add_argument("--out", required=True, help="WXE1 output path")
    ap.add_argument("--space", choices=sorted(SPACES), default="inception-pool3")
    ap.add_argument("--batch", type=int, default=32)
    ap.add_argument("--device", default="cpu")
    ap.add_argument(
        "--random-weights",
        action="store_true",
        help="skip the weight download (inception only); for plumbing tests",
    )
    args = ap.parse_args(argv)

    paths = [line.strip() for line in Path(args.images).read_text().splitlines() if line.strip()]
    if not paths:
        print("no images listed", file=sys.stderr)
        return 1
    if args.space == "inception-pool3":
        rows = inception_rows(paths, args.batch, args.device, args.random_weights)
    else:
        if args.random_weights:
            print("--random-weights only applies to inception-pool3", file=sys.stderr)
            return 2
        rows = clip_rows(paths, args.batch, args.device)
    if rows.shape != (len(paths), SPACES[args.space]):
        print(f"unexpected embedding shape {rows.shape}", file=sys.stderr)
        return 1
    write_wxe(args.out, rows, [Path(p).stem for p in paths], args.space)
    return 0


if __name__ == "__main__":
    sys.exit(main())
