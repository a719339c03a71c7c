from .aodv import AodvRouteEntry, AodvRouter
from .base import IneshSettings, Router, inesh_admit_next_hop
from .dsr import DsrRouteCache, DsrRouter
from .messages import ControlMessage, DataPacket, MsgKind

__all__ = ["AodvRouteEntry", "AodvRouter", "ControlMessage", "DataPacket", "DsrRouteCache",
           "DsrRouter", "IneshSettings", "MsgKind", "Router", "inesh_admit_next_hop"]
