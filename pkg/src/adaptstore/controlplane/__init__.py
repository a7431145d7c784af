from adaptstore.controlplane.server import ControlPlaneServer

__all__ = ["ControlPlaneServer"]
