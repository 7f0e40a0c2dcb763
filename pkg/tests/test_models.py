"""Tests for the result dataclasses in ``mixup_optimal.models``."""

from __future__ import annotations

import json

import numpy as np
import pytest

from mixup_optimal.exceptions import ContractError
from mixup_optimal.models.assumptions import Assumption2Report, CollinearityViolation
from mixup_optimal.models.dataset import LabeledDataset
from mixup_optimal.models.linear import InterpolationCertificate, LinearClassifier
from mixup_optimal.models.oracle import GridSpec, SegmentHit
from mixup_optimal.models.recovery import RankTrialReport
from mixup_optimal.models.training import Evaluation, MlpModel, TrainingHistory


class TestLabeledDatasetSerialisation:
    def test_from_dict_of_to_dict(self, cross: LabeledDataset) -> None:
        data = json.loads(json.dumps(cross.to_dict()))
        again = LabeledDataset.from_dict(data)
        assert again == cross
        assert again.name == "cross"

    def test_from_arrays_infers_k(self) -> None:
        ds = LabeledDataset.from_arrays([[0.0], [1.0], [2.0]], [1, 3, 2])
        assert ds.k == 3
        assert ds.mass == pytest.approx(1 / 3)

    def test_not_hashable(self, cross: LabeledDataset) -> None:
        with pytest.raises(TypeError):
            hash(cross)


class TestGridSpec:
    def test_around_pads_bounding_box(self, cross: LabeledDataset) -> None:
        spec = GridSpec.around(cross.points, margin=0.25, resolution=5)
        assert spec.to_dict() == {
            "xmin": -1.25,
            "xmax": 1.25,
            "ymin": -1.25,
            "ymax": 1.25,
            "nx": 5,
            "ny": 5,
        }

    def test_cells_are_row_major(self) -> None:
        spec = GridSpec(0.0, 1.0, 10.0, 20.0, nx=2, ny=3)
        cells = spec.cells()
        assert cells.shape == (6, 2)
        np.testing.assert_array_equal(cells[:2], [[0.0, 10.0], [1.0, 10.0]])
        np.testing.assert_array_equal(cells[-1], [1.0, 20.0])

    @pytest.mark.parametrize(
        "args", [(0.0, 1.0, 0.0, 1.0, 1, 5), (1.0, 1.0, 0.0, 1.0, 5, 5)]
    )
    def test_rejects_degenerate(self, args: tuple[float, ...]) -> None:
        with pytest.raises(ContractError):
            GridSpec(*args)  # type: ignore[arg-type]


class TestMlpModel:
    def _model(self) -> MlpModel:
        return MlpModel(
            layer_sizes=(2, 3, 2),
            weights=[np.arange(6.0).reshape(2, 3) / 10, np.ones((3, 2))],
            biases=[np.zeros(3), np.array([0.5, -0.5])],
        )

    def test_parameter_count(self) -> None:
        assert self._model().parameter_count == 2 * 3 + 3 + 3 * 2 + 2

    def test_dict_form_reproduces_outputs(self) -> None:
        model = self._model()
        again = MlpModel.from_dict(json.loads(json.dumps(model.to_dict())))
        x = np.array([[0.3, -1.0], [2.0, 0.5]])
        np.testing.assert_allclose(again.forward(x), model.forward(x))

    def test_forward_rows_are_distributions(self) -> None:
        probs = self._model().forward(np.array([[1e3, 1e3], [-1.0, 0.0]]))
        assert np.all(np.isfinite(probs))
        np.testing.assert_allclose(probs.sum(axis=1), 1.0)

    def test_with_params_does_not_alias(self) -> None:
        model = self._model()
        params = [p * 2.0 for p in model.params()]
        doubled = model.with_params(params)
        np.testing.assert_array_equal(doubled.weights[1], 2.0 * model.weights[1])
        np.testing.assert_array_equal(model.weights[1], np.ones((3, 2)))


class TestTrainingRecords:
    def test_history_rows(self) -> None:
        history = TrainingHistory(
            mode="erm", seed=4, losses=[0.7, 0.3], train_errors=[0.5, 0.0]
        )
        assert history.epochs == 2
        assert history.final_error == 0.0
        assert history.rows() == [
            {"epoch": 1, "loss": 0.7, "train_error": 0.5},
            {"epoch": 2, "loss": 0.3, "train_error": 0.0},
        ]

    def test_empty_history(self) -> None:
        assert np.isnan(TrainingHistory(mode="mixup", seed=0).final_error)

    def test_evaluation_rates(self) -> None:
        ev = Evaluation(
            probs=np.full((4, 2), 0.5),
            predictions=np.array([1, 1, 1, 1]),
            correct=np.array([True, False, True, True]),
        )
        assert ev.accuracy == 0.75
        assert ev.error == 0.25


class TestLinearRecords:
    def test_off_span_norm(self) -> None:
        basis = np.array([[1.0], [0.0]])
        clf = LinearClassifier(theta=np.array([3.0, 4.0]), span_basis=basis)
        assert clf.off_span_norm == pytest.approx(4.0)
        assert clf.norm == pytest.approx(5.0)
        np.testing.assert_allclose(
            clf.margins(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([1.0, -1.0])),
            [3.0, -4.0],
        )

    def test_certificate_to_dict(self) -> None:
        cert = InterpolationCertificate(
            k=1.0, dual_coeffs=np.array([0.5, -0.1]), is_max_margin=False,
            sign_violations=(1,),
        )
        assert cert.to_dict() == {
            "k": 1.0,
            "dual_coeffs": [0.5, -0.1],
            "is_max_margin": False,
            "sign_violations": [1],
        }


class TestAssumptionRecords:
    def test_violation_row(self) -> None:
        row = CollinearityViolation(2, 0, 4, 0.5, 0.0).to_row()
        assert list(row) == ["x_idx", "u_idx", "v_idx", "lambda", "residual"]
        assert row["lambda"] == 0.5

    def test_report_truthiness_and_dict(self) -> None:
        hit = SegmentHit(
            p_index=0,
            q_index=2,
            classes=(1, 2),
            lambda_interval=(0.8, 1.0),
            lambda_star=0.9,
            pair_norm=1.5,
        )
        report = Assumption2Report(
            holds=False,
            cls=1,
            epsilon=0.1,
            delta=0.2,
            in_xmix=True,
            witnesses=[hit],
            reasons=["pair (0, 2) is too close to class 2"],
        )
        assert not report
        data = report.to_dict()
        assert data["class"] == 1
        assert data["witnesses"][0]["lambda_interval"] == [0.8, 1.0]


class TestRankTrialReport:
    def test_certified_without_non_column_draws(self) -> None:
        report = RankTrialReport(
            m=7, trials=1, column_perm_count=1, min_rank_among_non_column_perms=None
        )
        assert report.certified

    def test_not_certified_at_m(self) -> None:
        report = RankTrialReport(
            m=4, trials=3, column_perm_count=0, min_rank_among_non_column_perms=4
        )
        assert report.to_dict()["certified"] is False
