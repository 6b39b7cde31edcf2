from typing import Optional, Sequence, Union

from src.config import get_settings
from src.config.settings import Settings
from src.core import entanglement
from src.core.errors import InsufficientDecayData
from src.core.lattice_model import CouplingSpec
from src.core.schemas import EntanglementReport, SpectralClassification
from src.core.spectral import classify, szego_coefficients, szego_lower_bound
from src.kernels import LatticeKernel, Partition, as_partition, build_kernel
from src.utils.logger import get_logger

logger = get_logger(__name__)

Block = Union[int, Sequence[int], Partition]


class ReportEngine:
    """Orchestrates the computation of entanglement reports."""

    def __init__(self, settings: Optional[Settings] = None, backend: Optional[str] = None):
        """Initializes the ReportEngine."""
        self.settings = settings or get_settings()
        self.backend = backend or self.settings.kernel.backend

    @property
    def tolerances(self):
        return self.settings.tolerances

    def kernel(self, spec: CouplingSpec) -> LatticeKernel:
        return build_kernel(spec, self.backend, self.tolerances)

    def _szego_bound(self, spec: CouplingSpec, classification: SpectralClassification) -> Optional[float]:
        if not classification.is_regular:
            return None
        coefficients = szego_coefficients(spec, self.settings.scaling.szego_order, classification, self.tolerances)
        return szego_lower_bound(coefficients)

    def report(
        self,
        spec: CouplingSpec,
        block: Block,
        kernel: Optional[LatticeKernel] = None,
        with_correlation: bool = True,
    ) -> EntanglementReport:
        """Computes S, I and both bounds for one block.

        1D specs additionally get the Szego bound (when Regular) and the
        correlation length (when enough lags rise above the noise floor).
        """
        partition = as_partition(block, spec.dimension)
        kernel = kernel or self.kernel(spec)
        mu, value = entanglement.entropy(kernel, partition, self.tolerances)
        information = entanglement.mutual_information(kernel, partition, self.tolerances)
        lower = entanglement.det_lower_bound(kernel, partition)
        upper = entanglement.negativity_upper_bound(kernel, partition)

        szego = None
        correlation = None
        if spec.dimension == 1:
            szego = self._szego_bound(spec, classify(spec, self.tolerances))
            if with_correlation:
                try:
                    correlation = entanglement.correlation_length(kernel, self.tolerances)
                except InsufficientDecayData as e:
                    logger.warning(f"No correlation length for N={spec.n_sites}: {e}")

        if not information <= value + 1e-9 or not value <= upper + 1e-9:
            logger.warning(f"Bound ordering I <= S <= upper violated: I={information}, S={value}, upper={upper}")

        logger.debug(f"Report for N={spec.n_sites}, block {list(partition.extents)}: S={value:.12g}")
        return EntanglementReport(
            n_sites=spec.n_sites,
            extents=list(spec.extents),
            block=list(partition.extents),
            mu_spectrum=mu.tolist(),
            entropy=value,
            mutual_information=information,
            det_lower_bound=lower,
            negativity_upper_bound=upper,
            szego_lower_bound=szego,
            correlation=correlation,
        )
