import os

import numpy as np
import pytest

from src.error_handling.error_handling import ConfigurationError, ContractViolation
from src.fusion.methods import FusionMethod, MethodKind, build_predictor
from src.fusion.selection import predict_ams_topk
from src.nn.serialization import load_bundle, load_model


@pytest.mark.parametrize("text,kind,k", [
    ("fedavg", MethodKind.FEDAVG, None),
    (" AMS_TOP1 ", MethodKind.AMS_TOP1, None),
    ("ams_topk(3)", MethodKind.AMS_TOPK, 3),
    ("ams_topk:2", MethodKind.AMS_TOPK, 2),
    ("ams_cross", MethodKind.AMS_CROSS, None),
])
def test_parse(text, kind, k):
    method = FusionMethod.parse(text)
    assert (method.kind, method.k) == (kind, k)


@pytest.mark.parametrize("text", ["pfnm", "ams_topk", "ams_topk()"])
def test_parse_rejects(text):
    with pytest.raises(ConfigurationError):
        FusionMethod.parse(text)


def test_parse_list_and_str():
    methods = FusionMethod.parse_list("ensemble_uniform, ams_topk(2),ams_full")
    assert [str(m) for m in methods] == ["ensemble_uniform", "ams_topk(2)", "ams_full"]


def test_method_requirements():
    assert FusionMethod(MethodKind.FEDAVG).needs_shared_init
    assert FusionMethod(MethodKind.AMS_TOP1).needs_same_depth
    assert not FusionMethod(MethodKind.AMS_CROSS).needs_same_depth
    assert not FusionMethod(MethodKind.ENSEMBLE_UNIFORM).needs_same_depth


def test_topk_validated_against_model_count(make_model):
    with pytest.raises(ContractViolation):
        build_predictor(FusionMethod(MethodKind.AMS_TOPK, 4), [make_model([3, 4, 2]) for _ in range(3)])


def test_concat_direct_matches_ams_full(make_model, rng):
    models = [make_model([3, 4, 4, 2]) for _ in range(3)]
    X = rng.normal(size=(12, 3))
    concat = build_predictor(FusionMethod(MethodKind.CONCAT_DIRECT), models)
    full = build_predictor(FusionMethod(MethodKind.AMS_FULL), models)
    np.testing.assert_allclose(concat(X), full(X), atol=1e-12)


def test_topk_predictor(make_model, rng):
    models = [make_model([3, 4, 2]) for _ in range(4)]
    X = rng.normal(size=(5, 3))
    predictor = build_predictor(FusionMethod(MethodKind.AMS_TOPK, 2), models)
    np.testing.assert_array_equal(predictor(X), predict_ams_topk(models, X, 2))


def test_fedavg_predictor_uses_counts(make_model):
    models = [make_model([3, 4, 2]) for _ in range(2)]
    weighted = build_predictor(FusionMethod(MethodKind.FEDAVG), models, [1, 3], uniform_fedavg=False)
    expected = models[0].matrices()[0] + 0.75 * (models[1].matrices()[0] - models[0].matrices()[0])
    np.testing.assert_allclose(weighted.fused_model.matrices()[0], expected, atol=1e-15)


def test_save_fused_and_bundle(tmp_path, make_model):
    models = [make_model([3, 4, 2]) for _ in range(2)]
    fedavg = build_predictor(FusionMethod(MethodKind.FEDAVG), models)
    _, tag = load_model(fedavg.save(os.path.join(tmp_path, "fedavg.flw")))
    assert tag == "fedavg"
    top1 = build_predictor(FusionMethod(MethodKind.AMS_TOP1), models)
    loaded, tag = load_bundle(top1.save(os.path.join(tmp_path, "top1.flb")))
    assert tag == "ams_top1" and len(loaded) == 2
