#!/usr/bin/env python3
"""Regenerates fixtures/: scene bundles for replay and the outcome sets.

Scenes are drawn, not captured: every labelled component is a rectangle
painted on a flat device face, so the label boxes are exact by construction
and the canned provider replies are written from the same numbers.

    python3 tools/fixtures/make_fixtures.py [--out fixtures]
"""

import argparse
import json
import math
import shutil
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

W, H = 960, 720
DW, DH = 256, 192
FX = FY = 760.0
BACKGROUND_DEPTH = 1.8
FACE_DEPTH = 0.9
FACE_SLOPE = 0.0001  # metres per image row below the principal point

# Camera 1.1 m up, yawed 10 degrees; identical for every scene of a bundle.
YAW = math.radians(10.0)
POSE = {
    "rotation": [math.cos(YAW), 0.0, math.sin(YAW), 0.0, 1.0, 0.0, -math.sin(YAW), 0.0, math.cos(YAW)],
    "translation": [0.2, 1.1, 0.5],
}


def dump(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def box_text(name, box):
    y0, x0, y1, x1 = box
    return f"{{name: {name}, pos: [{y0}, {x0}, {y1}, {x1}]}}"


class Scene:
    """A device face (x0, y0, x1, y1) at FACE_DEPTH in front of a far wall."""

    def __init__(self, face, base_color, holes=()):
        self.face = face
        self.base_color = base_color
        self.parts = []  # (box, color)
        self.holes = holes  # depth-grid rectangles with no reading

    def part(self, box, color):
        self.parts.append((box, color))
        return box

    def render(self, directory):
        directory.mkdir(parents=True, exist_ok=True)
        img = Image.new("RGB", (W, H), (214, 210, 200))
        draw = ImageDraw.Draw(img)
        for y in range(0, H, 48):  # wall tiles give the far plane some texture
            draw.line([(0, y), (W, y)], fill=(200, 196, 186))
        x0, y0, x1, y1 = self.face
        draw.rectangle([x0, y0, x1 - 1, y1 - 1], fill=self.base_color)
        for (by0, bx0, by1, bx1), color in self.parts:
            draw.rectangle([bx0, by0, bx1 - 1, by1 - 1], fill=color, outline=(30, 30, 30))
        img.save(directory / "image.png", optimize=False)

        depth = np.full((DH, DW), BACKGROUND_DEPTH, dtype=np.float32)
        for gy in range(DH):
            for gx in range(DW):
                px = (gx + 0.5) * W / DW
                py = (gy + 0.5) * H / DH
                if x0 <= px < x1 and y0 <= py < y1:
                    depth[gy, gx] = FACE_DEPTH + FACE_SLOPE * (py - H / 2)
        for gx0, gy0, gx1, gy1 in self.holes:
            depth[gy0:gy1, gx0:gx1] = 0.0
        depth.astype("<f4").tofile(directory / "depth.f32")

        dump(directory / "meta.json", {
            "image": "image.png",
            "depth": "depth.f32",
            "depth_width": DW,
            "depth_height": DH,
            "intrinsics": {"fx": FX, "fy": FY, "cx": W / 2, "cy": H / 2, "width": W, "height": H},
            "pose": POSE,
        })


def write_mask(path, box, inset=0.12):
    """Component silhouette over the box crop: an inset rounded rectangle."""
    y0, x0, y1, x1 = box
    w, h = x1 - x0, y1 - y0
    mask = Image.new("L", (w, h), 0)
    dx, dy = max(1, int(w * inset)), max(1, int(h * inset))
    ImageDraw.Draw(mask).rounded_rectangle([dx, dy, w - 1 - dx, h - 1 - dy], radius=min(dx, dy), fill=255)
    path.parent.mkdir(parents=True, exist_ok=True)
    mask.save(path)
    return np.count_nonzero(np.asarray(mask)) / (w * h)


class Bundle:
    def __init__(self, out, bundle_id, query, device_brand=None):
        self.dir = out / bundle_id
        if self.dir.exists():
            shutil.rmtree(self.dir)
        self.bundle_id = bundle_id
        self.query = query
        self.device_brand = device_brand
        self.scenes = {}
        self.steps = []  # (document, scene, label)
        self.entries = []

    def scene(self, scene_id, scene):
        self.scenes[scene_id] = scene
        return scene

    def step(self, instruction, visual_type, key_components, scene, expected, components=None, kinds=None):
        doc = {"instruction": instruction, "visual_type": visual_type, "key_components": key_components}
        label = {
            "expected_visual_type": visual_type,
            "expected_key_component": key_components[0],
            "instruction_correct": True,
            "guidance_correct": True,
            "expected": dict(expected, kinds=kinds),
        }
        if components:
            label["components"] = components
        self.steps.append((doc, scene, label))

    def entry(self, **fields):
        self.entries.append(fields)

    def write(self):
        for scene_id, scene in self.scenes.items():
            scene.render(self.dir / "scenes" / scene_id)
        plan = {"instructions": [doc for doc, _, _ in self.steps]}
        if self.device_brand:
            plan["device_brand"] = self.device_brand
        dump(self.dir / "plan.json", plan)
        dump(self.dir / "labels.json", {"steps": [label for _, _, label in self.steps]})
        dump(self.dir / "bundle.json", {
            "format": "guided.bundle/1",
            "bundle_id": self.bundle_id,
            "query": self.query,
            "initial_scene": self.steps[0][1],
            "steps": [{"scene": scene} for _, scene, _ in self.steps],
            "provider": "provider",
        })
        dump(self.dir / "provider" / "index.json",
             {"entries": [{"capability": "plan", "reply": "../plan.json"}] + self.entries})


def grounding(bundle, name, box, scene=None):
    e = {"capability": "bbox", "component": name, "text": box_text(name, box)}
    if scene:
        e["scene"] = scene
    bundle.entry(**e)


def translation(bundle, name, box, target, scene=None):
    e = {"capability": "translation", "component": name,
         "text": box_text(name, box)[:-1] + f", target_pos: [{target[0]}, {target[1]}]}}"}
    if scene:
        e["scene"] = scene
    bundle.entry(**e)


def rotation(bundle, name, axis, direction, scene=None):
    e = {"capability": "rotation", "component": name, "text": f"{{rotation: [{axis}, {direction}]}}"}
    if scene:
        e["scene"] = scene
    bundle.entry(**e)


def segmentation(bundle, mask_name, box, scene=None):
    coverage = write_mask(bundle.dir / "provider" / "masks" / mask_name, box)
    e = {"capability": "segmentation", "box": list(box), "mask": f"masks/{mask_name}"}
    if scene:
        e["scene"] = scene
    bundle.entry(**e)
    return coverage


def office_printer(out):
    b = Bundle(out, "office-printer-clean", "how to clean the scanning area of this printer", "Konica Minolta")
    closed = b.scene("s0", Scene((150, 90, 830, 690), (236, 236, 232), holes=[(0, 0, 12, 10)]))
    opened = b.scene("s1", Scene((150, 90, 830, 690), (236, 236, 232), holes=[(0, 0, 12, 10)]))
    panel = (150, 610, 260, 800)
    adf_closed = (120, 220, 240, 760)
    adf_open = (100, 220, 250, 760)
    lower_glass = (270, 260, 380, 720)
    lever = (262, 200, 320, 250)
    upper_glass = (140, 300, 200, 680)
    guide = (330, 280, 354, 560)
    screen = (160, 630, 240, 780)
    for s in (closed, opened):
        s.part(panel, (70, 72, 80))
        s.part(screen, (120, 180, 220))
    closed.part(adf_closed, (200, 200, 196))
    opened.part(adf_open, (188, 188, 186))
    opened.part(upper_glass, (150, 190, 210))
    opened.part(lower_glass, (140, 180, 205))
    opened.part(lever, (40, 150, 70))
    opened.part(guide, (150, 150, 150))

    panel_name = "The control panel on the right of the printer"
    adf_name = "The automatic document feeder (ADF) on top"
    grounding(b, panel_name, panel)
    b.step("Stand in front of the printer and find the control panel", 1, [panel_name], "s0",
           {"box": list(panel)}, kinds=["box3d"])

    rotation(b, adf_name, "x", "CCW", scene="s0")
    grounding(b, adf_name, adf_closed, scene="s0")
    coverage = segmentation(b, "adf_closed.png", adf_closed, scene="s0")
    assert coverage >= 0.30
    b.step("Open the automatic document feeder", 2, [adf_name, "rotation"], "s0",
           {"box": list(adf_closed), "rotation": ["x", "CCW"]}, kinds=["image_plane_animation", "arc_arrow"])

    glass_name = "The lower scanning glass"
    grounding(b, glass_name, lower_glass)
    b.step("Wipe the lower glass with a soft cloth", 4, [glass_name, "left and right", "cloth"], "s1",
           {"box": list(lower_glass), "tool": "cloth"}, kinds=["tool_placement"])

    lever_name = "The green lever on the left of the feeder"
    grounding(b, lever_name, lever)
    b.step("Release the green lever", 3, [lever_name, "hook"], "s1",
           {"box": list(lever), "gesture": "hook"}, kinds=["gesture_placement"])

    upper_name = "The upper glass strip inside the feeder"
    grounding(b, upper_name, upper_glass)
    b.step("Clean the upper glass with the cloth", 4, [upper_name, "left and right", "cloth"], "s1",
           {"box": list(upper_glass), "tool": "cloth"}, kinds=["tool_placement"])

    guide_name = "The narrow gray opening and closing guide"
    grounding(b, guide_name, guide)
    b.step("Push to close the opening and closing guide", 1, [guide_name], "s1",
           {"box": list(guide)}, kinds=["particle_emitter"])

    rotation(b, adf_name, "x", "CW", scene="s1")
    grounding(b, adf_name, adf_open, scene="s1")
    segmentation(b, "adf_open.png", adf_open, scene="s1")
    b.step("Close the automatic document feeder", 2, [adf_name, "rotation"], "s1",
           {"box": list(adf_open), "rotation": ["x", "CW"]}, kinds=["image_plane_animation", "arc_arrow"])

    screen_name = "The touch screen of the control panel"
    grounding(b, screen_name, screen)
    b.step("Wait 10 seconds and check the screen for errors", 5, [screen_name, "00:10"], "s1",
           {"box": list(screen)}, kinds=["timer_widget"])
    b.write()


def printer_reset(out):
    b = Bundle(out, "printer-reset", "how to clean the 3D printer from this stage", "Prusa")
    s = b.scene("s0", Scene((120, 60, 860, 700), (60, 60, 64), holes=[(240, 180, 256, 192)]))
    frame = (70, 130, 690, 850)
    printed = (430, 420, 480, 520)
    bed = (480, 260, 540, 560)
    knob = (560, 600, 640, 700)
    nozzle = (250, 520, 320, 600)
    filament = (150, 540, 250, 580)
    s.part(frame, (230, 110, 40))
    s.part(bed, (40, 40, 44))
    s.part(printed, (90, 200, 90))
    s.part(knob, (240, 120, 40))
    s.part(nozzle, (180, 180, 185))
    s.part(filament, (250, 250, 250))

    setup_name = "The front of the 3D printer"
    grounding(b, setup_name, frame)
    b.step("Stand in front of the 3D printer", 1, [setup_name], "s0", {"box": list(frame)}, kinds=["box3d"])

    frame_name = "The orange frame of the 3D printer"
    grounding(b, frame_name, frame)
    b.step("Locate the 3D printer", 1, [frame_name], "s0", {"box": list(frame)}, kinds=["box3d"])

    printed_name = "The printed object on the print bed"
    grounding(b, printed_name, printed)
    b.step("Scrape the printed object off the bed", 4, [printed_name, "left and right", "scraper"], "s0",
           {"box": list(printed), "tool": "scraper"}, kinds=["tool_placement"])

    bed_name = "printer bed"
    bed_center = [(bed[1] + bed[3]) // 2 + 40, (bed[0] + bed[2]) // 2]
    translation(b, bed_name, bed, bed_center)
    segmentation(b, "bed.png", bed)
    b.step("move the print bed back to the center", 2, [bed_name, "translation"], "s0",
           {"box": list(bed), "target": bed_center}, kinds=["image_plane_animation"])

    knob_name = "The orange control knob below the display"
    grounding(b, knob_name, knob)
    b.step('Select "Unload filament" using the knob', 1, [knob_name], "s0", {"box": list(knob)}, kinds=["box3d"])

    nozzle_name = "The nozzle of the print head"
    grounding(b, nozzle_name, nozzle)
    b.step("Wait 1 minute and 30 seconds for the nozzle to heat", 5, [nozzle_name, "01:30"], "s0",
           {"box": list(nozzle)}, kinds=["timer_widget"])

    b.step("Confirm unload using the knob", 1, [knob_name], "s0", {"box": list(knob)}, kinds=["box3d"])

    filament_name = "filament on top of nozzle"
    grounding(b, filament_name, filament)
    b.step("Pull the filament out", 3, [filament_name, "pinch"], "s0",
           {"box": list(filament), "gesture": "pinch"}, kinds=["gesture_placement"])
    b.write()


def kitchen(out):
    b = Bundle(out, "kitchen", "how to finish cooking dinner in this kitchen")
    s = b.scene("s1", Scene((40, 180, 920, 700), (180, 150, 120), holes=[(0, 180, 6, 192)]))
    start = (412, 655, 450, 710)
    cooker_lid = (300, 600, 340, 780)
    basket_out = (520, 320, 600, 440)
    basket_in = [380, 470]
    oven_door = (380, 80, 560, 300)
    bowl = (560, 560, 660, 760)
    lemon = (600, 120, 660, 200)
    for box, color in ((cooker_lid, (30, 30, 30)), (start, (250, 140, 20)), (basket_out, (20, 20, 22)),
                       (oven_door, (90, 90, 96)), (bowl, (235, 235, 240)), (lemon, (240, 220, 40))):
        s.part(box, color)

    start_name = "The orange Start button"
    grounding(b, start_name, start)
    b.step("press start button on the rice cooker", 1, [start_name], "s1",
           {"box": list(start)}, kinds=["particle_emitter"])

    basket_name = "Air fryer basket"
    translation(b, basket_name, basket_out, basket_in)
    segmentation(b, "basket.png", basket_out)
    b.step("Return the basket to the air fryer to resume cooking", 2, [basket_name, "translation"], "s1",
           {"box": list(basket_out), "target": basket_in}, kinds=["image_plane_animation"])

    door_name = "The glass door of the toaster oven"
    grounding(b, door_name, oven_door)
    rotation(b, door_name, "x", "CCW")
    segmentation(b, "oven_door.png", oven_door)
    b.step("Open the toaster oven door", 2, [door_name, "rotation"], "s1",
           {"box": list(oven_door), "rotation": ["x", "CCW"]}, kinds=["image_plane_animation", "arc_arrow"])

    grounding(b, "Mixing bowl", bowl)
    b.step("Mix the ingredients with a whisk", 4, ["Mixing bowl", "rotate", "whisk"], "s1",
           {"box": list(bowl), "tool": "whisk"}, kinds=["tool_placement", "arc_arrow"])

    b.step("Let the food stand for 30s", 5, ["Mixing bowl", "00:30"], "s1",
           {"box": list(bowl)}, kinds=["timer_widget"])

    lid_name = "The black lid handle of the rice cooker"
    grounding(b, lid_name, cooker_lid)
    b.step("Hold the lid handle firmly", 3, [lid_name, "grip"], "s1",
           {"box": list(cooker_lid), "gesture": "grip"}, kinds=["gesture_placement"])

    lemon_name = "The lemon on the cutting board"
    grounding(b, lemon_name, lemon)
    b.step("Zest the lemon with a microplane", 4, [lemon_name, "left and right", "microplane"], "s1",
           {"box": list(lemon), "tool": "microplane"}, components={"tool_gen": True}, kinds=["tool_placement"])

    # Boundary case for the segmentation contract: a 1x1 box gets a 1-pixel mask.
    tiny = (100, 100, 101, 101)
    mask_path = b.dir / "provider" / "masks" / "tiny.png"
    b.write()
    mask_path.parent.mkdir(parents=True, exist_ok=True)
    Image.new("L", (1, 1), 255).save(mask_path)
    index = json.loads((b.dir / "provider" / "index.json").read_text())
    index["entries"].append({"capability": "segmentation", "box": list(tiny), "mask": "masks/tiny.png"})
    dump(b.dir / "provider" / "index.json", index)


# ---------------------------------------------------------------------------
# Outcome sets. Each encodes one evaluation table as per-step outcomes; the
# harness recomputes the table from them.

TYPE_CATEGORY = {1: "highlight", 3: "gesture", 4: "tool", 5: "widget"}


def outcome(bundle_id, step, expected_type, category, **kw):
    o = {
        "bundle_id": bundle_id,
        "step": step,
        "expected_type": expected_type,
        "generated_type": expected_type,
        "category": category,
        "instruction_correct": True,
        "type_correct": True,
        "component_correct": True,
        "guidance_correct": None,
        "kinds": [],
        "error": None,
        "latency_s": None,
        "generated_tool": False,
        "components": [],
    }
    o.update(kw)
    if not o["type_correct"] and o["generated_type"] == expected_type:
        o["generated_type"] = 1 if expected_type != 1 else 2
    return o


def category_of(expected_type, i):
    return TYPE_CATEGORY.get(expected_type) or ("translation" if i % 2 == 0 else "rotation")


def plan_accuracy(out):
    """100 steps from 15 tasks.

    Per-type rows count assessed steps (guidance verdict present) by expected
    type. The total row needs every plan field and the guidance correct.
    Three assessed steps were misclassified yet got correct guidance, and
    three plan-correct steps were never assessed.
    """
    rows = {1: (40, 32), 2: (20, 17), 3: (14, 11), 4: (4, 3), 5: (5, 5)}
    misclassified_ok = {1: 1, 2: 1, 3: 1}
    outcomes = []

    def add(expected_type, **kw):
        n = len(outcomes)
        outcomes.append(outcome(f"task-{n % 15 + 1:02d}", n // 15, expected_type,
                                category_of(expected_type, n), **kw))

    for t, (total, correct) in rows.items():
        wrong_type = misclassified_ok.get(t, 0)
        for _ in range(wrong_type):
            add(t, type_correct=False, guidance_correct=True)
        for _ in range(correct - wrong_type):
            add(t, guidance_correct=True)
        for _ in range(total - correct):
            add(t, guidance_correct=False)
    for t in (1, 2, 3):
        add(t)  # plan-correct, unassessed
    for _ in range(4):
        add(1, instruction_correct=False)
    for t in (1, 1, 2, 2, 3, 4, 1):
        add(t, type_correct=False)
    for t in (1, 2, 3):
        add(t, component_correct=False)
    assert len(outcomes) == 100
    dump(out / "plan_accuracy.json", {"format": "guided.outcomes/1", "outcomes": outcomes})


def type_latency(out):
    """20 steps per category; every step carries the category's mean latency."""
    spec = {
        "highlight": (1, 18, 3.29, {"bbox": (18, 3.23)}),
        "translation": (2, 16, 4.03, {"bbox": (20, 3.49), "end_position": (16, None), "segmentation": (18, 0.46)}),
        "rotation": (2, 14, 4.09, {"bbox": (20, 3.36), "rotation_info": (14, 2.41), "segmentation": (20, 0.47)}),
        "gesture": (3, 15, 3.31, {"bbox": (20, 3.25), "gesture_type": (18, None), "placement": (17, None)}),
        "tool": (4, 15, 3.29, {"bbox": (16, 3.24)}),
        "widget": (5, 20, 3.30, {"bbox": (20, 3.24)}),
    }
    outcomes = []
    for category, (vtype, correct, latency, components) in spec.items():
        for i in range(20):
            comps = []
            for name, (ok, comp_latency) in components.items():
                comps.append({"name": name, "correct": i < ok, "latency_s": comp_latency})
            o = outcome(f"balanced-{category}", i, vtype, category, guidance_correct=i < correct,
                        latency_s=latency, components=comps)
            if category == "tool" and i >= 17:
                # Generated tool: one of three usable, far slower.
                o["generated_tool"] = True
                o["latency_s"] = 29.23
                o["components"].append({"name": "tool_gen", "correct": i == 17, "latency_s": 23.80})
            outcomes.append(o)
    dump(out / "type_latency.json", {"format": "guided.outcomes/1", "outcomes": outcomes})


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[2] / "fixtures"))
    args = parser.parse_args()
    out = Path(args.out)
    office_printer(out / "bundles")
    printer_reset(out / "bundles")
    kitchen(out / "bundles")
    plan_accuracy(out / "outcomes")
    type_latency(out / "outcomes")


if __name__ == "__main__":
    main()
