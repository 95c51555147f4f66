#!/usr/bin/env python3
"""Regenerates the committed test data under tests/data.

Outputs:
  imagenet_labels.txt        1000-line label manifest (torchvision category order)
  models/tiny_classifier.onnx  GlobalAveragePool -> Flatten -> Gemm, (N,3,224,224) -> (N,1000)
  models/wrong_input.onnx      same graph declared on (N,3,32,32) inputs
  fixtures/                    images + reference tensors from PIL/torchvision transforms
  synthetic_corpus/            small PNG texture corpus for the stub end-to-end runs
  resnet50_reference.jsonl        5640-record prediction log whose top-3 rows follow the
                               reference ResNet50 association rows (120 samples/texture)

Requires numpy, Pillow, torch, torchvision, onnx. Output is deterministic.
"""
import json
import os
import pathlib

import numpy as np
import onnx
import torch
from onnx import TensorProto, helper, numpy_helper
from PIL import Image
from torchvision import transforms
from torchvision.models import ResNet50_Weights

HERE = pathlib.Path(__file__).resolve().parent
MEAN = [0.485, 0.456, 0.406]
STD = [0.229, 0.224, 0.225]


def write_labels():
    labels = ResNet50_Weights.DEFAULT.meta["categories"]
    assert len(labels) == 1000
    (HERE / "imagenet_labels.txt").write_text("\n".join(labels) + "\n", encoding="utf-8")
    return labels


def tiny_weights(num_classes=1000):
    rng = np.random.default_rng(20240101)
    w = rng.normal(size=(3, num_classes)).astype(np.float32)
    b = rng.normal(scale=0.1, size=(num_classes,)).astype(np.float32)
    return w, b


def make_model(path, side, num_classes=1000):
    w, b = tiny_weights(num_classes)
    inp = helper.make_tensor_value_info("input", TensorProto.FLOAT, ["N", 3, side, side])
    out = helper.make_tensor_value_info("logits", TensorProto.FLOAT, ["N", num_classes])
    nodes = [
        helper.make_node("GlobalAveragePool", ["input"], ["pooled"]),
        helper.make_node("Flatten", ["pooled"], ["flat"], axis=1),
        helper.make_node("Gemm", ["flat", "W", "B"], ["logits"], transB=1),
    ]
    graph = helper.make_graph(
        nodes, "tiny_classifier", [inp], [out],
        initializer=[numpy_helper.from_array(np.ascontiguousarray(w.T), "W"), numpy_helper.from_array(b, "B")])
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 13)])
    model.ir_version = 7
    onnx.checker.check_model(model)
    path.parent.mkdir(parents=True, exist_ok=True)
    onnx.save(model, str(path))


def tiny_logits(tensor):
    w, b = tiny_weights()
    pooled = tensor.reshape(3, -1).astype(np.float64).mean(axis=1)
    return pooled @ w.astype(np.float64) + b


def fixture_images():
    rng = np.random.default_rng(7)
    yy, xx = np.mgrid[0:480, 0:640]
    grad = np.stack([(xx * 255 // 639), (yy * 255 // 479), ((xx + yy) * 255 // 1118)], -1)
    noise = rng.integers(0, 256, size=(375, 500, 3))
    stripes = np.zeros((300, 200, 3), dtype=np.uint8)
    stripes[:, ::8] = [250, 20, 40]
    stripes[::5, :] = [10, 200, 90]
    gray = (np.add.outer(np.arange(256), np.arange(300)) % 256).astype(np.uint8)
    rgba = np.concatenate([rng.integers(0, 256, size=(90, 120, 3)),
                           rng.integers(0, 256, size=(90, 120, 1))], -1).astype(np.uint8)
    small = rng.integers(0, 256, size=(10, 10, 3)).astype(np.uint8)
    return {
        "gradient.png": Image.fromarray(grad.astype(np.uint8), "RGB"),
        "noise.png": Image.fromarray(noise.astype(np.uint8), "RGB"),
        "stripes.png": Image.fromarray(stripes, "RGB"),
        "gray.png": Image.fromarray(gray, "L"),
        "rgba.png": Image.fromarray(rgba, "RGBA"),
        "small.png": Image.fromarray(small, "RGB"),
        "gradient.jpg": Image.fromarray(grad.astype(np.uint8), "RGB"),
    }


def write_fixtures():
    out = HERE / "fixtures"
    out.mkdir(exist_ok=True)
    modes = {
        "square": transforms.Resize((256, 256)),
        "shortest-side": transforms.Resize(256),
    }
    rows = ["image\tresize_mode\ttensor\tpredicted_index"]
    for name, img in fixture_images().items():
        if name.endswith(".jpg"):
            img.save(out / name, quality=92)
        else:
            img.save(out / name)
        loaded = Image.open(out / name).convert("RGB")
        for mode, resize in modes.items():
            pipeline = transforms.Compose([
                resize, transforms.CenterCrop(224), transforms.ToTensor(),
                transforms.Normalize(MEAN, STD)])
            tensor = pipeline(loaded).numpy().astype("<f4")
            assert tensor.shape == (3, 224, 224)
            tensor_name = f"{pathlib.Path(name).stem}_{pathlib.Path(name).suffix[1:]}.{mode}.f32"
            tensor.tofile(out / tensor_name)
            predicted = int(np.argmax(tiny_logits(tensor)))
            rows.append(f"{name}\t{mode}\t{tensor_name}\t{predicted}")
    (out / "fixtures.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_synthetic_corpus():
    root = HERE / "synthetic_corpus"
    rng = np.random.default_rng(11)
    classes = {"banded": (2, 60), "bubbly": (3, 140), "cracked": (4, 220)}
    for cls, (count, base) in classes.items():
        (root / cls).mkdir(parents=True, exist_ok=True)
        for i in range(count):
            h, w = 24 + 8 * i, 32 + 4 * i
            level = base + int(rng.integers(-40, 40))
            arr = np.clip(rng.normal(level, 20, size=(h, w, 3)), 0, 255).astype(np.uint8)
            Image.fromarray(arr, "RGB").save(root / cls / f"{cls}_{i:04d}.png")
    (root / "bubbly" / "README.txt").write_text("not an image\n")


RESNET50_TOP3 = """
honeycombed & honeycomb & 0.731 & chain mail & 0.071 & velvet & 0.027
cobwebbed & spider web & 0.655 & poncho & 0.046 & radio telescope & 0.046
waffled & waffle iron & 0.427 & honeycomb & 0.117 & pretzel & 0.075
striped & zebra & 0.381 & tiger & 0.169 & velvet & 0.093
knitted & dishrag & 0.331 & wool & 0.239 & cardigan & 0.188
stratified & cliff & 0.305 & velvet & 0.140 & stone wall & 0.125
spiralled & coil & 0.296 & maze & 0.061 & chambered nautilus & 0.043
bubbly & bubble & 0.286 & beer glass & 0.104 & Petri dish & 0.077
dotted & bib & 0.248 & shower curtain & 0.148 & wallet & 0.097
polka-dotted & bib & 0.247 & Windsor tie & 0.125 & wallet & 0.089
paisley & velvet & 0.223 & wool & 0.112 & shower curtain & 0.103
wrinkled & velvet & 0.219 & quilt & 0.153 & wool & 0.051
frilly & head cabbage & 0.209 & hoopskirt & 0.105 & velvet & 0.069
grid & window screen & 0.199 & oscilloscope & 0.114 & shoji & 0.063
crystalline & plastic bag & 0.193 & head cabbage & 0.082 & honeycomb & 0.068
lacelike & handkerchief & 0.191 & velvet & 0.119 & stole & 0.108
perforated & strainer & 0.190 & space heater & 0.080 & honeycomb & 0.074
stained & velvet & 0.184 & volcano & 0.040 & potpie & 0.035
woven & hamper & 0.175 & velvet & 0.156 & dishrag & 0.100
blotchy & velvet & 0.164 & ant & 0.058 & fig & 0.032
gauzy & shower curtain & 0.158 & velvet & 0.079 & window shade & 0.068
cracked & stone wall & 0.158 & guillotine & 0.074 & spider web & 0.074
braided & knot & 0.155 & hamper & 0.125 & dishrag & 0.097
zigzagged & maze & 0.153 & envelope & 0.131 & quilt & 0.115
meshed & chainlink fence & 0.148 & honeycomb & 0.140 & window screen & 0.137
interlaced & maze & 0.148 & prayer rug & 0.092 & shield & 0.065
veined & leaf beetle & 0.143 & head cabbage & 0.095 & sulphur butterfly & 0.049
lined & shower curtain & 0.142 & web site & 0.094 & window shade & 0.073
banded & shower curtain & 0.142 & bib & 0.079 & Windsor tie & 0.079
marbled & velvet & 0.137 & cliff & 0.052 & spider web & 0.044
flecked & wool & 0.135 & velvet & 0.080 & cardigan & 0.069
scaly & honeycomb & 0.135 & tile roof & 0.071 & wool & 0.061
matted & wool & 0.132 & komondor & 0.070 & wig & 0.059
pleated & shower curtain & 0.129 & velvet & 0.118 & window shade & 0.102
crosshatched & window screen & 0.127 & velvet & 0.069 & handkerchief & 0.066
fibrous & hay & 0.126 & pot & 0.076 & matchstick & 0.050
swirly & fire screen & 0.116 & velvet & 0.103 & shower curtain & 0.084
grooved & radiator & 0.115 & velvet & 0.100 & doormat & 0.084
porous & French loaf & 0.115 & honeycomb & 0.049 & velvet & 0.044
chequered & wool & 0.114 & tray & 0.108 & crossword puzzle & 0.079
studded & strainer & 0.110 & Windsor tie & 0.105 & cuirass & 0.059
potholed & volcano & 0.108 & geyser & 0.090 & cliff dwelling & 0.063
freckled & lipstick & 0.104 & seat belt & 0.083 & Band Aid & 0.064
sprinkled & ice cream & 0.075 & dough & 0.070 & pretzel & 0.052
bumpy & custard apple & 0.073 & jackfruit & 0.049 & spaghetti squash & 0.047
pitted & pomegranate & 0.068 & doormat & 0.047 & switch & 0.042
smeared & mask & 0.057 & velvet & 0.054 & jellyfish & 0.041
"""

PER_CLASS = 120


def write_reference_log(labels):
    index_of = {label: i for i, label in enumerate(labels)}
    rows = []
    for line in RESNET50_TOP3.strip().splitlines():
        cells = [c.strip() for c in line.split("&")]
        rows.append((cells[0], [(index_of[cells[i]], float(cells[i + 1])) for i in (1, 3, 5)]))
    textures = sorted(name for name, _ in rows)
    assert len(textures) == 47
    texture_index = {name: i for i, name in enumerate(textures)}
    lines = []
    for name, top in sorted(rows, key=lambda r: texture_index[r[0]]):
        counts = [round(effect * PER_CLASS) for _, effect in top]
        assert counts[0] >= counts[1] >= counts[2] >= 2
        predictions = []
        for (obj, _), n in zip(top, counts):
            predictions += [obj] * n
        remaining = PER_CLASS - sum(counts)
        cap = counts[2] - 1
        used = {obj for obj, _ in top}
        filler = (obj for obj in range(len(labels)) if obj not in used)
        while remaining > 0:
            obj = next(filler)
            n = min(cap, remaining)
            predictions += [obj] * n
            remaining -= n
        # interleave deterministically so the log is not grouped by prediction
        order = np.random.default_rng(texture_index[name]).permutation(PER_CLASS)
        for sample, slot in enumerate(order):
            obj = predictions[slot]
            lines.append(json.dumps({
                "v": 1,
                "sample_path": f"images/{name}/{name}_{sample + 1:04d}.jpg",
                "texture_index": texture_index[name],
                "texture_name": name,
                "predicted_object_index": obj,
                "predicted_object_label": labels[obj],
            }))
    assert len(lines) == 5640
    (HERE / "resnet50_reference.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")


def main():
    torch.manual_seed(0)
    labels = write_labels()
    make_model(HERE / "models" / "tiny_classifier.onnx", 224)
    make_model(HERE / "models" / "wrong_input.onnx", 32)
    write_fixtures()
    write_synthetic_corpus()
    write_reference_log(labels)


if __name__ == "__main__":
    os.chdir(HERE)
    main()
