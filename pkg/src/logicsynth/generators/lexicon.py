"""Bilingual word pools. Entries at the same index are translations."""

NAMES = {
    "en": (
        "Wright", "Turner", "Ross", "Torres", "Harris", "Brooks", "Garcia", "Miller",
        "Evans", "Carter", "Foster", "Hughes", "Bennett", "Coleman", "Griffin", "Hayes",
        "Jenkins", "Morgan", "Palmer", "Reed", "Sanders", "Walsh", "Young", "Murphy",
    ),
    "zh": (
        "王伟", "李娜", "张敏", "刘洋", "陈静", "杨磊", "赵强", "黄丽",
        "周杰", "吴芳", "徐涛", "孙燕", "马超", "朱琳", "胡斌", "郭峰",
        "何静怡", "高翔", "林晨", "罗欣", "梁宇", "宋佳", "郑浩", "谢婷",
    ),
}

DIRECTIONS = {
    "en": {"U": "up", "D": "down", "L": "left", "R": "right"},
    "zh": {"U": "上", "D": "下", "L": "左", "R": "右"},
}

EVENTS = {
    "en": (
        "Heavy rain", "Highway closure", "The driver failed to avoid the obstacle",
        "Power outage", "Traffic lights stopped working", "A long traffic jam formed",
        "Scorching heat", "Reservoir levels dropped", "Water rationing began",
        "A landslide", "The railway was suspended", "Commuters switched to buses",
        "A factory fire", "Thick smoke spread", "The school was evacuated",
        "A server crash", "Online orders were delayed", "Customers filed complaints",
        "A strong typhoon", "Flights were cancelled", "Hotels became fully booked",
        "A bridge inspection", "One lane was closed", "Delivery trucks were rerouted",
        "Crop failure", "Vegetable prices rose", "Restaurants changed their menus",
        "A citywide marathon", "Roads were cordoned off", "A street market was postponed",
    ),
    "zh": (
        "暴雨", "高速公路封闭", "司机未能避开障碍物",
        "停电", "交通信号灯失灵", "形成了长时间拥堵",
        "酷热天气", "水库水位下降", "开始限制供水",
        "山体滑坡", "铁路停运", "通勤者改乘公交",
        "工厂起火", "浓烟扩散", "学校紧急疏散",
        "服务器宕机", "网购订单延误", "顾客提出投诉",
        "强台风", "航班取消", "酒店全部订满",
        "桥梁检修", "一条车道封闭", "货车绕道行驶",
        "农作物歉收", "蔬菜价格上涨", "餐馆调整菜单",
        "全市马拉松", "道路被封锁", "街头集市延期",
    ),
}

YES_NO = {"en": {"yes": "yes", "no": "no"}, "zh": {"yes": "是", "no": "否"}}

assert all(len(v) == len(NAMES["en"]) for v in NAMES.values())
assert all(len(v) == len(EVENTS["en"]) for v in EVENTS.values())
