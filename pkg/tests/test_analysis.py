import math

import pytest
from numpy.testing import assert_allclose

from analysis import ChannelAnalysisService, get_analysis_service
from channel import catalog
from decompose import EntropySetKind
from errors import NotCompletelyPositiveError

from conftest import h

LN2 = math.log(2)


@pytest.fixture
def service():
    return get_analysis_service()


def test_singleton():
    assert get_analysis_service() is get_analysis_service()
    assert isinstance(get_analysis_service(), ChannelAnalysisService)


def test_depolarizing_quarter(service):
    report = service.analyze(catalog("depolarizing", [0.25]), "depolarizing(0.25)")
    assert_allclose(report.normal_form.lambdas, [2 / 3] * 3, atol=1e-12)
    assert report.min_output_entropy == pytest.approx(0.450561208866, abs=1e-10)
    assert report.holevo_capacity == pytest.approx(0.242585971694, abs=1e-10)
    assert report.shannon_capacity == pytest.approx(report.holevo_capacity, abs=1e-7)
    assert report.max_norm == pytest.approx(5 / 6)
    assert_allclose(report.fixed_point, 0.0)
    assert report.entropy_set.kind is EntropySetKind.SPHERE
    assert report.ellipse is None


def test_fuchs(service, fuchs):
    report = service.analyze(fuchs, "fuchs")
    assert report.cp.boundary
    assert report.min_output_entropy == pytest.approx(0.4164955307, abs=1e-8)
    assert_allclose(report.fixed_point, [0.0, 0.0, 0.5], atol=1e-12)
    assert report.entropy_set is None
    assert_allclose(report.ellipse.min_entropy_points, [[0.5, 0, 0.5], [-0.5, 0, 0.5]], atol=1e-9)
    assert report.shannon_capacity <= report.holevo_capacity + 1e-9


def test_identity(service, identity):
    report = service.analyze(identity)
    assert report.name == "channel"
    assert report.min_output_entropy == pytest.approx(0.0, abs=1e-15)
    assert report.holevo_capacity == pytest.approx(LN2, abs=1e-12)


def test_amplitude_damping_has_no_ellipse(service):
    report = service.analyze(catalog("amplitude-damping", [0.5]))
    assert report.ellipse is None and report.entropy_set is None
    assert_allclose(report.fixed_point, [0.0, 0.0, 1.0], atol=1e-12)


def test_non_cp(service, transpose):
    with pytest.raises(NotCompletelyPositiveError):
        service.analyze(transpose, "transpose")
    report = service.analyze(transpose, "transpose", require_cp=False)
    assert not report.cp.is_cp
    assert report.max_norm is None and report.holevo_capacity is None
    assert_allclose(report.normal_form.lambdas, [1.0, 1.0, -1.0], atol=1e-12)


def test_to_dict_units(service):
    report = service.analyze(catalog("two-pauli", [0.5]), "two-pauli(0.5)")
    nats = report.to_dict()
    bits = report.to_dict(bits=True)
    assert nats["unit"] == "nats" and bits["unit"] == "bits"
    assert bits["min_output_entropy"] == pytest.approx(nats["min_output_entropy"] / LN2)
    assert bits["min_output_entropy"] == pytest.approx(h(0.5) / LN2, abs=1e-10)
    assert bits["max_norm"] == nats["max_norm"]
    assert nats["entropy_set"]["kind"] == "disk"
    assert len(nats["normal_form"]["lifted_pre"]) == 2
